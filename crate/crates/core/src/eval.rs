//! Fit accuracy, posterior summaries and convergence diagnostics.

use std::io::Write;

use nalgebra::DMatrix;
use statrs::statistics::{Data, OrderStatistics};

use crate::error::{Error, Result};
use crate::sampler::DrawsStore;

/// Minimum retained draws for [`diagnostics`].
pub const MIN_DIAGNOSTIC_DRAWS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyReport {
    /// `Σ_i Σ_t |e_{i,t}| / T`.
    pub mad: f64,
    /// `Σ_i Σ_t e_{i,t}² / T`.
    pub mse: f64,
    /// Same sums divided by the number of residuals `m T`.
    pub mad_per_obs: f64,
    pub mse_per_obs: f64,
    /// Divisor of `mad` and `mse`.
    pub divisor: usize,
    /// `(mad, mse)` of each series, divided by `T`.
    pub per_series: Vec<(f64, f64)>,
}

/// Residuals `e_{i,t} = y_{t,i} - (α_i + x_{t,i} θ_{t,i})` summarised as
/// absolute and squared deviations. Both totals are divided by `T`, not by
/// the `m T` residuals; the per-observation variants use `m T`.
pub fn mad_mse(
    y: &DMatrix<f64>,
    alpha: &[f64],
    activations: &DMatrix<f64>,
    regressors: &DMatrix<f64>,
) -> Result<AccuracyReport> {
    let (horizon, m) = y.shape();
    if activations.shape() != (horizon, m) || regressors.shape() != (horizon, m) || alpha.len() != m {
        return Err(Error::input(format!(
            "data are {horizon}x{m}; activations {:?}, regressors {:?}, {} trends",
            activations.shape(),
            regressors.shape(),
            alpha.len()
        )));
    }
    if horizon == 0 {
        return Err(Error::input("empty series"));
    }
    let tf = horizon as f64;
    let per_series: Vec<(f64, f64)> = (0..m)
        .map(|i| {
            let (mut a, mut s) = (0.0, 0.0);
            for t in 0..horizon {
                let e = y[(t, i)] - (alpha[i] + regressors[(t, i)] * activations[(t, i)]);
                a += e.abs();
                s += e * e;
            }
            (a / tf, s / tf)
        })
        .collect();
    let mad: f64 = per_series.iter().map(|p| p.0).sum();
    let mse: f64 = per_series.iter().map(|p| p.1).sum();
    Ok(AccuracyReport {
        mad,
        mse,
        mad_per_obs: mad / m as f64,
        mse_per_obs: mse / m as f64,
        divisor: horizon,
        per_series,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    pub q025: f64,
    pub q50: f64,
    pub q975: f64,
    /// `P(φ_ij = 0 | y)` for connectivity coefficients.
    pub prob_zero: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub n_draws: usize,
    pub params: Vec<ParamSummary>,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["parameter", "mean", "sd", "q2.5", "q50", "q97.5", "prob_zero"])?;
        for p in &self.params {
            w.write_record([
                p.name.clone(),
                p.mean.to_string(),
                p.sd.to_string(),
                p.q025.to_string(),
                p.q50.to_string(),
                p.q975.to_string(),
                p.prob_zero.map(|v| v.to_string()).unwrap_or_default(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<summary>", e))?;
        Ok(())
    }
}

/// Mean, standard deviation (divisor `n - 1`) and 2.5/50/97.5% quantiles.
pub fn summarize_trace(name: &str, x: &[f64]) -> Result<ParamSummary> {
    if x.is_empty() {
        return Err(Error::input(format!("no draws for {name}")));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let sd = if x.len() > 1 {
        (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let mut data = Data::new(x.to_vec());
    Ok(ParamSummary {
        name: name.to_string(),
        mean,
        sd,
        q025: data.quantile(0.025),
        q50: data.quantile(0.5),
        q975: data.quantile(0.975),
        prob_zero: None,
    })
}

/// Summaries of every scalar parameter. Connectivity means include the
/// excluded draws as zeros; their atom probability is the fraction of draws
/// with the indicator off. Indicator columns themselves are not listed.
pub fn summarize(store: &DrawsStore) -> Result<PosteriorSummary> {
    if store.is_empty() {
        return Err(Error::input("cannot summarize an empty draw store"));
    }
    let columns = store.columns();
    let mut params = Vec::new();
    for (name, values) in &columns {
        if name.starts_with("inc_") {
            continue;
        }
        let mut s = summarize_trace(name, values)?;
        if let Some(rest) = name.strip_prefix("phi_") {
            let inc = &columns
                .iter()
                .find(|(n, _)| n.strip_prefix("inc_") == Some(rest))
                .expect("indicator column for every coefficient")
                .1;
            s.prob_zero = Some(1.0 - inc.iter().sum::<f64>() / inc.len() as f64);
        }
        params.push(s);
    }
    Ok(PosteriorSummary {
        n_draws: store.len(),
        params,
    })
}

/// Sample autocorrelations `ρ_0..ρ_max_lag` with the `1/n` autocovariance.
/// A constant trace has `ρ_k = 1` at every lag.
pub fn acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0 = c.iter().map(|v| v * v).sum::<f64>();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|k| {
            if c0 == 0.0 {
                1.0
            } else {
                c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / c0
            }
        })
        .collect()
}

/// Effective sample size with the initial positive (monotone) sequence
/// truncation: sums of adjacent autocorrelation pairs are accumulated while
/// positive and forced to be non-increasing.
pub fn effective_sample_size(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 4 {
        return n as f64;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0 = c.iter().map(|v| v * v).sum::<f64>();
    if c0 == 0.0 {
        return 1.0;
    }
    // Autocorrelations are formed only as far as the truncation reaches.
    let rho = |k: usize| c[..n - k].iter().zip(&c[k..]).map(|(a, b)| a * b).sum::<f64>() / c0;
    let mut tau = -1.0;
    let mut prev = f64::INFINITY;
    let mut k = 0;
    while 2 * k + 1 < n {
        let gamma = (rho(2 * k) + rho(2 * k + 1)).min(prev);
        if gamma <= 0.0 {
            break;
        }
        tau += 2.0 * gamma;
        prev = gamma;
        k += 1;
    }
    n as f64 / tau.max(1.0 / n as f64)
}

/// Monte Carlo standard error of the mean of `x`.
pub fn mc_standard_error(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (var / effective_sample_size(x)).sqrt()
}

/// Running quantiles of the first `k` draws, recorded every `step` draws.
pub fn cumulative_quantiles(x: &[f64], probs: &[f64], step: usize) -> Vec<(usize, Vec<f64>)> {
    let step = step.max(1);
    (step..=x.len())
        .step_by(step)
        .map(|k| {
            let mut d = Data::new(x[..k].to_vec());
            (k, probs.iter().map(|&p| d.quantile(p)).collect())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamDiagnostics {
    pub name: String,
    /// Autocorrelation averaged over chains.
    pub acf: Vec<f64>,
    /// Sum of per-chain effective sample sizes.
    pub ess: f64,
    /// `(draws so far, [q2.5, q50, q97.5])` over the pooled draws.
    pub cumulative_quantiles: Vec<(usize, Vec<f64>)>,
}

pub const DIAGNOSTIC_MAX_LAG: usize = 50;

/// ACF, ESS and cumulative quantile paths of every scalar parameter.
pub fn diagnostics(store: &DrawsStore) -> Result<Vec<ParamDiagnostics>> {
    if store.len() < MIN_DIAGNOSTIC_DRAWS {
        return Err(Error::input(format!(
            "diagnostics need at least {MIN_DIAGNOSTIC_DRAWS} draws, found {}",
            store.len()
        )));
    }
    let chains: Vec<usize> = {
        let mut c: Vec<usize> = store.draws.iter().map(|d| d.chain).collect();
        c.sort_unstable();
        c.dedup();
        c
    };
    let step = (store.len() / 100).max(1);
    Ok(store
        .columns()
        .into_iter()
        .map(|(name, pooled)| {
            let traces: Vec<Vec<f64>> = chains
                .iter()
                .map(|&c| store.chain_column(&name, c).expect("known column"))
                .collect();
            let mut acf_mean = vec![0.0; DIAGNOSTIC_MAX_LAG + 1];
            let mut counts = vec![0usize; DIAGNOSTIC_MAX_LAG + 1];
            let mut ess = 0.0;
            for tr in &traces {
                for (k, r) in acf(tr, DIAGNOSTIC_MAX_LAG).into_iter().enumerate() {
                    acf_mean[k] += r;
                    counts[k] += 1;
                }
                ess += effective_sample_size(tr);
            }
            let acf: Vec<f64> = acf_mean
                .into_iter()
                .zip(counts)
                .filter(|&(_, c)| c > 0)
                .map(|(s, c)| s / c as f64)
                .collect();
            ParamDiagnostics {
                cumulative_quantiles: cumulative_quantiles(&pooled, &[0.025, 0.5, 0.975], step),
                name,
                acf,
                ess,
            }
        })
        .collect())
}
