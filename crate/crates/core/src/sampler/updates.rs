//! Full-conditional updates. Each function reads the chain state and
//! returns fresh values; the sweep in `gibbs_sweep` writes them back.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::ln_gamma;

use super::{ChainState, ModelSpec};
use crate::dlm::{ffbs_sample, kalman_filter, StatePath};
use crate::error::{Error, Result};
use crate::priors::{sample_beta, sample_categorical, sample_dirichlet, sample_gamma, StateVarianceHierarchy};

/// Activations and lagged regressors of the current state path.
///
/// `current[t-1][i] = θ_{t,i}` and `lagged[t-1][j] = x^lag_{t-1,j} θ_{t-1,j}`
/// for `t = 1..=T`.
pub struct Lagged {
    current: Vec<Vec<f64>>,
    lagged: Vec<Vec<f64>>,
}

impl Lagged {
    pub fn new(spec: &ModelSpec, state: &ChainState) -> Self {
        let m = spec.n_regions();
        let off = spec.layout.activation_offset();
        let horizon = spec.horizon();
        let mut current = Vec::with_capacity(horizon);
        let mut lagged = Vec::with_capacity(horizon);
        for t in 1..=horizon {
            current.push((0..m).map(|i| state.theta[t][off + i]).collect());
            lagged.push(
                (0..m)
                    .map(|j| spec.layout.lagged_regressor(t, j) * state.theta[t - 1][off + j])
                    .collect(),
            );
        }
        Self { current, lagged }
    }

    /// Evolution residual `θ_{t,i} - Σ_j φ_ij z_{t,j}`.
    #[inline]
    pub fn residual(&self, phi: &DMatrix<f64>, t: usize, i: usize) -> f64 {
        let z = &self.lagged[t - 1];
        let mut r = self.current[t - 1][i];
        for (j, zj) in z.iter().enumerate() {
            r -= phi[(i, j)] * zj;
        }
        r
    }
}

fn nonfinite(parameter: impl Into<String>) -> Error {
    Error::NonFinite {
        iteration: 0,
        parameter: parameter.into(),
    }
}

fn checked_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, name: &str, rng: &mut R) -> Result<f64> {
    if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
        return Err(nonfinite(format!("{name} (shape {shape}, rate {rate})")));
    }
    let x = sample_gamma(shape, rate, rng);
    // Gamma draws with tiny shape can underflow to zero.
    Ok(x.max(f64::MIN_POSITIVE))
}

/// Step 1: filter at the current parameters and draw a full state path.
/// Stores the filter log-likelihood on the state.
pub fn sample_states<R: Rng + ?Sized>(spec: &ModelSpec, state: &mut ChainState, rng: &mut R) -> Result<StatePath> {
    let obs_var: Vec<f64> = state.lambda_y.iter().map(|l| 1.0 / l).collect();
    let (m0, c0) = spec
        .layout
        .initial_moments(spec.priors.trend_var, spec.priors.state0_var);
    let f = spec.layout.f_series();
    let model = spec.layout.build_model_unchecked(
        &state.phi,
        &obs_var,
        |t, i| state.state_variance(t, i),
        m0,
        c0,
        &f,
    );
    let filt = kalman_filter(&model, &spec.y)?;
    state.loglik = filt.loglik;
    ffbs_sample(&model, &filt, rng)
}

/// Step 2: `λ_y,i | ·` is Gamma; it scales both the observation noise and the
/// activation noise of region `i`.
pub fn update_obs_precision<R: Rng + ?Sized>(
    spec: &ModelSpec,
    state: &ChainState,
    lagged: &Lagged,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let m = spec.n_regions();
    let horizon = spec.horizon();
    let off = spec.layout.activation_offset();
    let prior = spec.priors.obs_precision;
    (0..m)
        .map(|i| {
            let comp = &state.hierarchy.components[i];
            let mut obs_ss = 0.0;
            let mut state_ss = 0.0;
            for t in 1..=horizon {
                let trend = if spec.layout.include_trend() { state.theta[t][i] } else { 0.0 };
                let fit = trend + spec.layout.obs_regressor(t, i) * state.theta[t][off + i];
                obs_ss += (spec.y[(t - 1, i)] - fit).powi(2);
                let w = lagged.residual(&state.phi, t, i);
                state_ss += comp.omega[t - 1] * w * w;
            }
            let shape = prior.shape + horizon as f64;
            let rate = prior.rate + 0.5 * obs_ss + 0.5 * comp.lambda_theta * state_ss;
            checked_gamma(shape, rate, &format!("lambda_y_{}", i + 1), rng)
        })
        .collect()
}

/// Step 3: every latent of the Beta-prime hierarchy from its conjugate full
/// conditional, component by component (`ω`, `λ_θ`, `ρ`, `β`, `ξ`, `ν`,
/// grid weights).
pub fn update_hierarchy<R: Rng + ?Sized>(
    spec: &ModelSpec,
    state: &ChainState,
    lagged: &Lagged,
    rng: &mut R,
) -> Result<StateVarianceHierarchy> {
    let horizon = spec.horizon();
    let grid = &state.hierarchy.prior.nu_grid;
    let alpha = &state.hierarchy.prior.dirichlet_alpha;
    let mut next = state.hierarchy.clone();

    for (i, comp) in next.components.iter_mut().enumerate() {
        let label = |name: &str| format!("{name}_{}", i + 1);
        let ly = state.lambda_y[i];
        let resid_sq: Vec<f64> = (1..=horizon)
            .map(|t| lagged.residual(&state.phi, t, i).powi(2))
            .collect();
        let nu = grid[comp.nu_index];

        for (t, w) in comp.omega.iter_mut().enumerate() {
            let rate = 0.5 * nu + 0.5 * ly * comp.lambda_theta * resid_sq[t];
            *w = checked_gamma(0.5 * (nu + 1.0), rate, &label("omega"), rng)?;
        }

        let weighted: f64 = comp.omega.iter().zip(&resid_sq).map(|(w, r)| w * r).sum();
        comp.lambda_theta = checked_gamma(
            0.5 * (nu - 1.0) + 0.5 * horizon as f64,
            comp.rho * comp.beta + 0.5 * ly * weighted,
            &label("lambda_theta"),
            rng,
        )?;

        let half = 0.5 * (nu - 1.0);
        comp.rho = checked_gamma(1.0 + half, 1.0 + comp.beta * comp.lambda_theta, &label("rho"), rng)?;
        comp.beta = checked_gamma(1.0 + half, comp.xi + comp.rho * comp.lambda_theta, &label("beta"), rng)?;
        comp.xi = checked_gamma(2.0, 1.0 + comp.beta, &label("xi"), rng)?;

        let sum_ln_omega: f64 = comp.omega.iter().map(|w| w.ln()).sum();
        let sum_omega: f64 = comp.omega.iter().sum();
        let ln_rate = (comp.rho * comp.beta).ln();
        let logw: Vec<f64> = grid
            .iter()
            .zip(&comp.varphi)
            .map(|(&g, &vp)| {
                let h = 0.5 * g;
                let shape_l = 0.5 * (g - 1.0);
                vp.ln()
                    + horizon as f64 * (h * h.ln() - ln_gamma(h))
                    + (h - 1.0) * sum_ln_omega
                    - h * sum_omega
                    + shape_l * ln_rate
                    - ln_gamma(shape_l)
                    + (shape_l - 1.0) * comp.lambda_theta.ln()
                    - comp.rho * comp.beta * comp.lambda_theta
            })
            .collect();
        let max = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(nonfinite(label("nu")));
        }
        let weights: Vec<f64> = logw.iter().map(|l| (l - max).exp()).collect();
        comp.nu_index = sample_categorical(&weights, rng);

        let mut post_alpha = alpha.clone();
        post_alpha[comp.nu_index] += 1.0;
        comp.varphi = sample_dirichlet(&post_alpha, rng);
    }
    Ok(next)
}

/// Result of one spike-and-slab update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConnectivityDraw {
    pub phi: f64,
    pub included: bool,
    /// Conditional posterior probability of inclusion used for the draw.
    pub inclusion_prob: f64,
    /// The lagged regressor was identically zero, so the data carried no
    /// information and the odds equal the prior odds.
    pub zero_regressor: bool,
}

/// Step 4: draw `(δ_ij, φ_ij)` with `φ_ij` integrated out of the inclusion
/// odds.
///
/// Given the other coefficients, the evolution equation of activation `i`
/// is a weighted regression of `r_t = θ_{t,i} - Σ_{k≠j} φ_ik z_{t,k}` on
/// `z_{t,j}` with precisions `h_t = λ_y,i λ_θ,i ω_{t,i}`. Against the slab
/// `N(0, 1/τ)` the Bayes factor for inclusion is
/// `sqrt(τ / (τ + S_zz)) exp(S_zr² / (2 (τ + S_zz)))`.
pub fn update_connectivity<R: Rng + ?Sized>(
    spec: &ModelSpec,
    state: &ChainState,
    lagged: &Lagged,
    (i, j): (usize, usize),
    rng: &mut R,
) -> ConnectivityDraw {
    let horizon = spec.horizon();
    let current_phi = state.phi[(i, j)];
    let mut s_zz = 0.0;
    let mut s_zr = 0.0;
    for t in 1..=horizon {
        let z = lagged.lagged[t - 1][j];
        if z == 0.0 {
            continue;
        }
        let h = state.state_precision(t, i);
        let r = lagged.residual(&state.phi, t, i) + current_phi * z;
        s_zz += h * z * z;
        s_zr += h * z * r;
    }
    let tau = state.tau[(i, j)];
    let zero_regressor = s_zz == 0.0;
    let post_prec = tau + s_zz;
    let log_bf = if zero_regressor {
        0.0
    } else {
        0.5 * (tau / post_prec).ln() + 0.5 * s_zr * s_zr / post_prec
    };
    let log_odds = state.pi.ln() - (1.0 - state.pi).ln() + log_bf;
    let inclusion_prob = if log_odds >= 0.0 {
        1.0 / (1.0 + (-log_odds).exp())
    } else {
        let e = log_odds.exp();
        e / (1.0 + e)
    };
    let included = rng.random::<f64>() < inclusion_prob;
    let phi = if included {
        let z: f64 = rng.sample(StandardNormal);
        s_zr / post_prec + z / post_prec.sqrt()
    } else {
        0.0
    };
    ConnectivityDraw {
        phi,
        included,
        inclusion_prob,
        zero_regressor,
    }
}

/// Step 5: `π | δ ~ Beta(a_π + k, b_π + K - k)` over the `K` free coefficients.
pub fn update_inclusion_weight<R: Rng + ?Sized>(
    spec: &ModelSpec,
    state: &ChainState,
    mask: &[bool],
    rng: &mut R,
) -> f64 {
    let free = mask.iter().filter(|&&b| !b).count() as f64;
    let k = state.n_included() as f64;
    let prior = spec.priors.point_mass.inclusion;
    sample_beta(prior.a + k, prior.b + free - k, rng)
}

/// Step 6: `τ_ij | φ_ij ~ Gamma(c + 1/2, d + φ²/2)` when included; excluded
/// (or masked) coefficients carry no information and draw from the prior.
pub fn update_slab_precisions<R: Rng + ?Sized>(
    spec: &ModelSpec,
    state: &ChainState,
    mask: &[bool],
    rng: &mut R,
) -> DMatrix<f64> {
    let m = spec.n_regions();
    let prior = spec.priors.point_mass.slab_precision;
    DMatrix::from_fn(m, m, |i, j| {
        let k = i * m + j;
        let tau = if state.included[k] && !mask[k] {
            let phi = state.phi[(i, j)];
            sample_gamma(prior.shape + 0.5, prior.rate + 0.5 * phi * phi, rng)
        } else {
            sample_gamma(prior.shape, prior.rate, rng)
        };
        tau.max(f64::MIN_POSITIVE)
    })
}
