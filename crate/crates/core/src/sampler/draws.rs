use std::io::Write;

use nalgebra::{DMatrix, DVector};

use super::{ChainState, ModelSpec};
use crate::error::Result;

/// Counters of recoverable numerical events over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SamplerWarnings {
    /// Backward-sampling steps that fell back to a pseudo-inverse.
    pub pinv_fallbacks: usize,
    /// Connectivity updates whose lagged regressor was identically zero.
    pub zero_regressor: usize,
}

impl SamplerWarnings {
    pub fn merge(&mut self, other: &Self) {
        self.pinv_fallbacks += other.pinv_fallbacks;
        self.zero_regressor += other.zero_regressor;
    }
}

/// One retained sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub chain: usize,
    pub iteration: usize,
    pub phi: DMatrix<f64>,
    /// Row-major inclusion indicators.
    pub included: Vec<bool>,
    pub tau: DMatrix<f64>,
    pub pi: f64,
    pub lambda_y: Vec<f64>,
    pub lambda_theta: Vec<f64>,
    pub rho: Vec<f64>,
    pub beta: Vec<f64>,
    pub xi: Vec<f64>,
    pub nu: Vec<f64>,
    pub loglik: f64,
    /// Full state path, when requested.
    pub states: Option<Vec<DVector<f64>>>,
    /// `ω_{t,i}` per region, when requested.
    pub omega: Option<Vec<Vec<f64>>>,
}

impl Draw {
    pub fn from_state(state: &ChainState, chain: usize, iteration: usize, store_states: bool) -> Self {
        let comps = &state.hierarchy.components;
        let per = |f: fn(&crate::priors::ComponentHierarchy) -> f64| comps.iter().map(f).collect();
        Self {
            chain,
            iteration,
            phi: state.phi.clone(),
            included: state.included.clone(),
            tau: state.tau.clone(),
            pi: state.pi,
            lambda_y: state.lambda_y.clone(),
            lambda_theta: per(|c| c.lambda_theta),
            rho: per(|c| c.rho),
            beta: per(|c| c.beta),
            xi: per(|c| c.xi),
            nu: (0..comps.len()).map(|i| state.hierarchy.nu(i)).collect(),
            loglik: state.loglik,
            states: store_states.then(|| state.theta.clone()),
            omega: store_states.then(|| comps.iter().map(|c| c.omega.clone()).collect()),
        }
    }

    /// Observation variance `1 / λ_y,i`.
    pub fn obs_variance(&self, i: usize) -> f64 {
        1.0 / self.lambda_y[i]
    }
}

/// Retained draws of one or more chains plus running posterior means of the
/// states and local precision multipliers.
#[derive(Debug, Clone)]
pub struct DrawsStore {
    pub n_regions: usize,
    pub include_trend: bool,
    pub n_chains: usize,
    pub draws: Vec<Draw>,
    /// Posterior mean of `θ_0..θ_T`.
    pub state_mean: Vec<DVector<f64>>,
    /// Posterior mean of `ω_{t,i}`, indexed `[i][t-1]`.
    pub omega_mean: Vec<Vec<f64>>,
    pub warnings: SamplerWarnings,
    accumulated: usize,
}

impl DrawsStore {
    pub fn new(spec: &ModelSpec, n_chains: usize) -> Self {
        let m = spec.n_regions();
        let horizon = spec.horizon();
        Self {
            n_regions: m,
            include_trend: spec.layout.include_trend(),
            n_chains,
            draws: Vec::new(),
            state_mean: vec![DVector::zeros(spec.layout.state_dim()); horizon + 1],
            omega_mean: vec![vec![0.0; horizon]; m],
            warnings: SamplerWarnings::default(),
            accumulated: 0,
        }
    }

    pub fn push(&mut self, draw: Draw) {
        self.draws.push(draw);
    }

    pub fn accumulate_means(&mut self, state: &ChainState) {
        for (acc, th) in self.state_mean.iter_mut().zip(&state.theta) {
            *acc += th;
        }
        for (acc, c) in self.omega_mean.iter_mut().zip(&state.hierarchy.components) {
            for (a, w) in acc.iter_mut().zip(&c.omega) {
                *a += w;
            }
        }
        self.accumulated += 1;
    }

    /// Turn the running sums into means.
    pub fn finish_means(&mut self) {
        if self.accumulated == 0 {
            return;
        }
        let n = self.accumulated as f64;
        for s in &mut self.state_mean {
            *s /= n;
        }
        for row in &mut self.omega_mean {
            row.iter_mut().for_each(|w| *w /= n);
        }
    }

    /// Concatenate stores in order, pooling the means by draw count.
    pub fn merge(stores: Vec<DrawsStore>) -> DrawsStore {
        let mut iter = stores.into_iter();
        let mut out = iter.next().expect("at least one chain");
        for other in iter {
            let (a, b) = (out.accumulated as f64, other.accumulated as f64);
            let total = a + b;
            if total > 0.0 {
                for (s, o) in out.state_mean.iter_mut().zip(&other.state_mean) {
                    *s = (&*s * a + o * b) / total;
                }
                for (row, orow) in out.omega_mean.iter_mut().zip(&other.omega_mean) {
                    for (w, ow) in row.iter_mut().zip(orow) {
                        *w = (*w * a + ow * b) / total;
                    }
                }
            }
            out.accumulated += other.accumulated;
            out.n_chains += other.n_chains;
            out.warnings.merge(&other.warnings);
            out.draws.extend(other.draws);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Draws of a single chain in iteration order.
    pub fn chain(&self, chain: usize) -> impl Iterator<Item = &Draw> {
        self.draws.iter().filter(move |d| d.chain == chain)
    }

    /// Posterior mean of `Φ`, counting excluded draws as zero.
    pub fn phi_mean(&self) -> DMatrix<f64> {
        let m = self.n_regions;
        let mut acc = DMatrix::zeros(m, m);
        for d in &self.draws {
            acc += &d.phi;
        }
        acc / self.draws.len().max(1) as f64
    }

    /// Posterior inclusion probability of every coefficient.
    pub fn inclusion_prob(&self) -> DMatrix<f64> {
        let m = self.n_regions;
        let n = self.draws.len().max(1) as f64;
        DMatrix::from_fn(m, m, |i, j| {
            self.draws.iter().filter(|d| d.included[i * m + j]).count() as f64 / n
        })
    }

    /// Posterior mean trend `α_i` (zero without trends).
    pub fn trend_mean(&self) -> Vec<f64> {
        (0..self.n_regions)
            .map(|i| match self.state_mean.last() {
                Some(last) if self.include_trend => last[i],
                _ => 0.0,
            })
            .collect()
    }

    /// Posterior mean activations `θ_{t,i}` as a `T x m` matrix.
    pub fn activation_mean(&self) -> DMatrix<f64> {
        let off = if self.include_trend { self.n_regions } else { 0 };
        let horizon = self.state_mean.len().saturating_sub(1);
        DMatrix::from_fn(horizon, self.n_regions, |t, i| self.state_mean[t + 1][off + i])
    }

    /// Scalar parameter names in column order.
    pub fn column_names(&self) -> Vec<String> {
        let m = self.n_regions;
        let mut names = Vec::new();
        for prefix in ["phi", "inc", "tau"] {
            for i in 1..=m {
                for j in 1..=m {
                    names.push(format!("{prefix}_{i}_{j}"));
                }
            }
        }
        names.push("pi".into());
        for prefix in ["lambda_y", "lambda_theta", "rho", "beta", "xi", "nu"] {
            for i in 1..=m {
                names.push(format!("{prefix}_{i}"));
            }
        }
        names.push("loglik".into());
        names
    }

    fn row(&self, d: &Draw) -> Vec<f64> {
        let m = self.n_regions;
        let mut row = Vec::with_capacity(3 * m * m + 6 * m + 2);
        for i in 0..m {
            for j in 0..m {
                row.push(d.phi[(i, j)]);
            }
        }
        row.extend(d.included.iter().map(|&b| if b { 1.0 } else { 0.0 }));
        for i in 0..m {
            for j in 0..m {
                row.push(d.tau[(i, j)]);
            }
        }
        row.push(d.pi);
        for v in [&d.lambda_y, &d.lambda_theta, &d.rho, &d.beta, &d.xi, &d.nu] {
            row.extend(v.iter().copied());
        }
        row.push(d.loglik);
        row
    }

    /// Trace of a named scalar over all draws, chains concatenated.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_names().iter().position(|n| n == name)?;
        Some(self.draws.iter().map(|d| self.row(d)[k]).collect())
    }

    /// Trace of a named scalar in one chain.
    pub fn chain_column(&self, name: &str, chain: usize) -> Option<Vec<f64>> {
        let k = self.column_names().iter().position(|n| n == name)?;
        Some(self.chain(chain).map(|d| self.row(d)[k]).collect())
    }

    /// Every named trace, in column order.
    pub fn columns(&self) -> Vec<(String, Vec<f64>)> {
        let names = self.column_names();
        let mut cols: Vec<Vec<f64>> = vec![Vec::with_capacity(self.draws.len()); names.len()];
        for d in &self.draws {
            for (c, v) in cols.iter_mut().zip(self.row(d)) {
                c.push(v);
            }
        }
        names.into_iter().zip(cols).collect()
    }

    /// Read draws written by [`write_csv`](Self::write_csv). State means are
    /// not part of the file and come back empty.
    pub fn read_csv(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let bad = |row: usize, column: &str, message: String| crate::error::Error::Data {
            path: path.to_path_buf(),
            row,
            column: column.to_string(),
            message,
        };
        let mut reader = csv::Reader::from_path(path)?;
        let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
        let n_phi = header.iter().filter(|h| h.starts_with("phi_")).count();
        let m = (n_phi as f64).sqrt().round() as usize;
        if m == 0 || m * m != n_phi {
            return Err(bad(0, "", "header does not describe a square connectivity matrix".into()));
        }
        let mut store = DrawsStore {
            n_regions: m,
            include_trend: false,
            n_chains: 0,
            draws: Vec::new(),
            state_mean: Vec::new(),
            omega_mean: Vec::new(),
            warnings: SamplerWarnings::default(),
            accumulated: 0,
        };
        let expected: Vec<String> = ["chain", "iteration"]
            .iter()
            .map(|s| s.to_string())
            .chain(store.column_names())
            .collect();
        if header != expected {
            return Err(bad(0, "", "unexpected column layout".into()));
        }
        for (r, rec) in reader.records().enumerate() {
            let row = r + 1;
            let rec = rec.map_err(|e| bad(row, "", e.to_string()))?;
            let vals = rec
                .iter()
                .zip(&header)
                .map(|(c, h)| c.parse::<f64>().map_err(|_| bad(row, h, format!("not a number: {c:?}"))))
                .collect::<Result<Vec<f64>>>()?;
            let mut it = vals.into_iter();
            let mut take = |n: usize| -> Vec<f64> { it.by_ref().take(n).collect() };
            let head = take(2);
            let phi = DMatrix::from_row_slice(m, m, &take(m * m));
            let included = take(m * m).into_iter().map(|v| v != 0.0).collect();
            let tau = DMatrix::from_row_slice(m, m, &take(m * m));
            let pi = take(1)[0];
            let lambda_y = take(m);
            let lambda_theta = take(m);
            let rho = take(m);
            let beta = take(m);
            let xi = take(m);
            let nu = take(m);
            let loglik = take(1)[0];
            store.draws.push(Draw {
                chain: head[0] as usize,
                iteration: head[1] as usize,
                phi,
                included,
                tau,
                pi,
                lambda_y,
                lambda_theta,
                rho,
                beta,
                xi,
                nu,
                loglik,
                states: None,
                omega: None,
            });
        }
        let mut chains: Vec<usize> = store.draws.iter().map(|d| d.chain).collect();
        chains.sort_unstable();
        chains.dedup();
        store.n_chains = chains.len();
        Ok(store)
    }

    /// Wide CSV: `chain, iteration` then one column per scalar parameter.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["chain".to_string(), "iteration".to_string()];
        header.extend(self.column_names());
        w.write_record(&header)?;
        for d in &self.draws {
            let mut rec = vec![d.chain.to_string(), d.iteration.to_string()];
            rec.extend(self.row(d).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| crate::error::Error::io("<draws>", e))?;
        Ok(())
    }
}
