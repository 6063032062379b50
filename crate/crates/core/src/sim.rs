//! Synthetic data: HRF-convolved block regressors, the univariate
//! sparse-signal study and the trivariate connectivity model.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::structure::ConnectivityLayout;

/// Connectivity truth used in the trivariate study, row `i` driving region
/// `i` from the lagged activations of regions `1..3`.
pub const TABLE1_PHI: [[f64; 3]; 3] = [
    [0.0, -0.1495, -3.0382],
    [0.0, -0.8365, -0.2667],
    [0.4179, 0.1365, 0.0],
];

pub fn table1_phi() -> DMatrix<f64> {
    DMatrix::from_fn(3, 3, |i, j| TABLE1_PHI[i][j])
}

/// Double-gamma HRF. Each lobe is a gamma density whose mode sits at the
/// given delay: shape `delay / dispersion + 1`, scale `dispersion`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HrfParams {
    pub peak_delay: f64,
    pub undershoot_delay: f64,
    pub peak_dispersion: f64,
    pub undershoot_dispersion: f64,
    pub undershoot_ratio: f64,
}

impl Default for HrfParams {
    fn default() -> Self {
        Self {
            peak_delay: 6.0,
            undershoot_delay: 16.0,
            peak_dispersion: 1.0,
            undershoot_dispersion: 1.0,
            undershoot_ratio: 1.0 / 6.0,
        }
    }
}

impl HrfParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.peak_delay,
            self.undershoot_delay,
            self.peak_dispersion,
            self.undershoot_dispersion,
            self.undershoot_ratio,
        ];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(Error::input("HRF parameters must be positive"))
        }
    }

    fn lobes(&self) -> [(f64, f64, f64); 2] {
        [
            (self.peak_delay / self.peak_dispersion + 1.0, self.peak_dispersion, 1.0),
            (
                self.undershoot_delay / self.undershoot_dispersion + 1.0,
                self.undershoot_dispersion,
                -self.undershoot_ratio,
            ),
        ]
    }

    /// `∫_0^u h`.
    pub fn integral(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        self.lobes()
            .iter()
            .map(|&(shape, scale, w)| w * gamma_lr(shape, u / scale))
            .sum()
    }
}

/// `h(u)`; zero for `u ≤ 0`.
pub fn hrf(u: f64, params: &HrfParams) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    params
        .lobes()
        .iter()
        .map(|&(shape, scale, w)| {
            let z = u / scale;
            w * ((shape - 1.0) * z.ln() - z - ln_gamma(shape)).exp() / scale
        })
        .sum()
}

/// Stimulus `s(t)`: 1 inside the listed `(onset, duration)` blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusDesign {
    pub total_time: f64,
    pub microtime_dt: f64,
    pub blocks: Vec<(f64, f64)>,
}

impl StimulusDesign {
    pub fn new(total_time: f64, microtime_dt: f64, mut blocks: Vec<(f64, f64)>) -> Result<Self> {
        if !(total_time > 0.0 && total_time.is_finite()) {
            return Err(Error::input("total time must be positive"));
        }
        if !(microtime_dt > 0.0 && microtime_dt.is_finite()) {
            return Err(Error::input("microtime step must be positive"));
        }
        blocks.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(on, dur) in &blocks {
            if !(on >= 0.0 && dur > 0.0 && on + dur <= total_time + 1e-9) {
                return Err(Error::input(format!("block ({on}, {dur}) outside [0, {total_time}]")));
            }
        }
        if blocks.windows(2).any(|w| w[0].0 + w[0].1 > w[1].0 + 1e-9) {
            return Err(Error::input("stimulus blocks overlap"));
        }
        Ok(Self {
            total_time,
            microtime_dt,
            blocks,
        })
    }

    /// Alternating OFF/ON blocks of `block_len` seconds, starting OFF and
    /// cycling until `total_time`.
    pub fn alternating(total_time: f64, microtime_dt: f64, block_len: f64) -> Result<Self> {
        if !(block_len > 0.0) {
            return Err(Error::input("block length must be positive"));
        }
        let mut blocks = Vec::new();
        let mut onset = block_len;
        while onset < total_time {
            blocks.push((onset, block_len.min(total_time - onset)));
            onset += 2.0 * block_len;
        }
        Self::new(total_time, microtime_dt, blocks)
    }

    /// Blocks of 18 trials at one trial every 2 s, alternating control and
    /// task, covering `n_scans` scans `tr` seconds apart.
    pub fn default_blocks(n_scans: usize, tr: f64) -> Result<Self> {
        Self::alternating(n_scans as f64 * tr, 0.1, 36.0)
    }

    pub fn is_on(&self, t: f64) -> bool {
        self.blocks.iter().any(|&(on, dur)| t >= on && t < on + dur)
    }

    /// Fraction of `[a, b)` covered by blocks.
    pub fn coverage(&self, a: f64, b: f64) -> f64 {
        let on: f64 = self
            .blocks
            .iter()
            .map(|&(start, dur)| ((start + dur).min(b) - start.max(a)).max(0.0))
            .sum();
        on / (b - a)
    }
}

/// `x(t_k) = ∫_0^{t_k} h(u) s(t_k - u) du` at scans `t_k = k·tr`,
/// `k = 0..n_scans`.
///
/// `s` is replaced by its average over each microtime cell and `h` is
/// integrated exactly over each cell, so the result is exact for block
/// edges on the microtime grid.
pub fn convolve_stimulus(design: &StimulusDesign, params: &HrfParams, tr: f64, n_scans: usize) -> Result<Vec<f64>> {
    params.validate()?;
    let dt = design.microtime_dt;
    if !(tr > 0.0) {
        return Err(Error::input("scan spacing must be positive"));
    }
    if dt > tr {
        return Err(Error::input(format!("microtime step {dt} is coarser than scan spacing {tr}")));
    }
    let ratio = tr / dt;
    let per_scan = ratio.round();
    if (ratio - per_scan).abs() > 1e-9 * ratio {
        return Err(Error::input("scan spacing must be a multiple of the microtime step"));
    }
    let per_scan = per_scan as usize;
    let n_cells = n_scans.saturating_sub(1) * per_scan;
    let s: Vec<f64> = (0..n_cells)
        .map(|l| design.coverage(l as f64 * dt, (l + 1) as f64 * dt))
        .collect();
    let cum: Vec<f64> = (0..=n_cells).map(|j| params.integral(j as f64 * dt)).collect();
    let kernel: Vec<f64> = cum.windows(2).map(|w| w[1] - w[0]).collect();
    Ok((0..n_scans)
        .map(|k| {
            let n = k * per_scan;
            (0..n).map(|l| s[l] * kernel[n - 1 - l]).sum()
        })
        .collect())
}

/// Univariate series with occasional large state innovations.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateTruth {
    /// `θ_0..θ_T`, with `θ_0 = 0`.
    pub theta: Vec<f64>,
    /// `w_1..w_T`.
    pub state_noise: Vec<f64>,
    /// `v_1..v_T`.
    pub obs_noise: Vec<f64>,
    /// Times (1-based) whose innovation came from the inflated component.
    pub outliers: Vec<usize>,
    pub obs_var: f64,
    pub state_var: f64,
    pub kappa: f64,
    pub phi: f64,
    pub pi_mix: f64,
}

/// `θ_t = φ θ_{t-1} + w_t`, `y_t = θ_t + v_t` with `v_t ~ N(0, V)` and
/// `w_t ~ π N(0, W) + (1 - π) N(0, κW)`, `W = V · w_over_v`. The bulk of the
/// innovations therefore has precision `λ_y λ_θ` with `λ_θ = V / W`.
pub fn simulate_univariate_sparse(
    obs_var: f64,
    w_over_v: f64,
    kappa: f64,
    phi: f64,
    pi_mix: f64,
    horizon: usize,
    seed: u64,
) -> Result<(Dataset, UnivariateTruth)> {
    if !(obs_var > 0.0 && w_over_v > 0.0 && kappa > 0.0 && phi.is_finite()) {
        return Err(Error::input("variances, ratio and kappa must be positive"));
    }
    if !(pi_mix > 0.0 && pi_mix <= 1.0) {
        return Err(Error::input("mixing weight must lie in (0, 1]"));
    }
    if horizon < 2 {
        return Err(Error::input("horizon must be at least 2"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let state_var = obs_var * w_over_v;
    let mut theta = vec![0.0];
    let mut state_noise = Vec::with_capacity(horizon);
    let mut obs_noise = Vec::with_capacity(horizon);
    let mut outliers = Vec::new();
    let mut y = Vec::with_capacity(horizon);
    for t in 1..=horizon {
        let outlier = rng.random::<f64>() >= pi_mix;
        let sd = if outlier {
            outliers.push(t);
            (kappa * state_var).sqrt()
        } else {
            state_var.sqrt()
        };
        let w = sd * rng.sample::<f64, _>(StandardNormal);
        let v = obs_var.sqrt() * rng.sample::<f64, _>(StandardNormal);
        let th = phi * theta[t - 1] + w;
        theta.push(th);
        state_noise.push(w);
        obs_noise.push(v);
        y.push(th + v);
    }
    let data = Dataset::new(
        DMatrix::from_column_slice(horizon, 1, &y),
        DMatrix::from_element(horizon, 1, 1.0),
        vec!["y".into()],
        1.0,
    )?;
    Ok((
        data,
        UnivariateTruth {
            theta,
            state_noise,
            obs_noise,
            outliers,
            obs_var,
            state_var,
            kappa,
            phi,
            pi_mix,
        },
    ))
}

/// Settings of the univariate sparse-signal simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UnivariateRecipe {
    pub obs_var: f64,
    pub w_over_v: f64,
    pub kappa: f64,
    pub phi: f64,
    pub pi_mix: f64,
    pub horizon: usize,
    pub seed: u64,
}

impl Default for UnivariateRecipe {
    fn default() -> Self {
        Self {
            obs_var: 1.0,
            w_over_v: 1.0,
            kappa: 20.0,
            phi: 0.5,
            pi_mix: 0.9,
            horizon: 285,
            seed: 1,
        }
    }
}

impl UnivariateRecipe {
    pub fn simulate(&self) -> Result<(Dataset, UnivariateTruth)> {
        simulate_univariate_sparse(
            self.obs_var,
            self.w_over_v,
            self.kappa,
            self.phi,
            self.pi_mix,
            self.horizon,
            self.seed,
        )
    }
}

/// Settings of the connectivity simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimRecipe {
    pub horizon: usize,
    /// Row-major `m x m` connectivity.
    pub phi: Vec<Vec<f64>>,
    /// State-innovation to observation variance ratio, `W_i / V_i`.
    pub signal_noise_ratio: f64,
    /// State-innovation variance `W_i`; observation variance is
    /// `W_i / signal_noise_ratio`.
    pub state_var: f64,
    pub alpha: Vec<f64>,
    pub seed: u64,
    /// Seconds between scans.
    pub tr: f64,
    pub hrf: HrfParams,
}

impl Default for SimRecipe {
    fn default() -> Self {
        Self {
            horizon: 285,
            phi: TABLE1_PHI.iter().map(|r| r.to_vec()).collect(),
            signal_noise_ratio: 1.0,
            state_var: 1.0,
            alpha: vec![1.0; 3],
            seed: 1,
            tr: 2.0,
            hrf: HrfParams::default(),
        }
    }
}

impl SimRecipe {
    pub fn n_regions(&self) -> usize {
        self.phi.len()
    }

    pub fn phi_matrix(&self) -> DMatrix<f64> {
        let m = self.n_regions();
        DMatrix::from_fn(m, m, |i, j| self.phi[i][j])
    }

    pub fn obs_var(&self) -> f64 {
        self.state_var / self.signal_noise_ratio
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.n_regions();
        if m == 0 || self.phi.iter().any(|r| r.len() != m) {
            return Err(Error::input("phi must be a non-empty square matrix"));
        }
        if self.alpha.len() != m {
            return Err(Error::input("one trend per region required"));
        }
        if self.horizon < 2 {
            return Err(Error::input("horizon must be at least 2"));
        }
        if !(self.signal_noise_ratio > 0.0 && self.signal_noise_ratio.is_finite()) {
            return Err(Error::input("signal/noise ratio must be positive"));
        }
        if !(self.state_var >= 0.0 && self.state_var.is_finite() && self.tr > 0.0) {
            return Err(Error::input("state variance must be non-negative and scan spacing positive"));
        }
        if self.phi.iter().flatten().chain(&self.alpha).any(|v| !v.is_finite()) {
            return Err(Error::input("phi and alpha must be finite"));
        }
        self.hrf.validate()
    }

    /// One convolved default block design shared by every region.
    pub fn default_regressors(&self) -> Result<DMatrix<f64>> {
        let design = StimulusDesign::default_blocks(self.horizon, self.tr)?;
        // Scan k sits at k·tr; the first scan is one step after the start.
        let x = convolve_stimulus(&design, &self.hrf, self.tr, self.horizon + 1)?;
        Ok(DMatrix::from_fn(self.horizon, self.n_regions(), |t, _| x[t + 1]))
    }
}

/// Everything drawn by [`simulate_trivariate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityTruth {
    pub phi: DMatrix<f64>,
    pub alpha: Vec<f64>,
    pub obs_var: f64,
    pub state_var: f64,
    /// Activations `θ_{t,i}` for `t = 0..T` (row `t`).
    pub activations: DMatrix<f64>,
    /// `log p(y | θ, α, V)`.
    pub obs_loglik: f64,
    /// `log p(θ_{1:T} | θ_0, Φ, W)`.
    pub state_loglik: f64,
}

fn normal_ln_pdf(x: f64, var: f64) -> f64 {
    -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + x * x / var)
}

/// Observation and state log-likelihood of a recorded truth.
pub fn truth_loglik(data: &Dataset, truth: &ConnectivityTruth, trans_x: &DMatrix<f64>) -> Result<(f64, f64)> {
    let layout = ConnectivityLayout::new(true, data.regressors.clone(), trans_x.clone())?;
    let m = layout.n_regions();
    let mut obs = 0.0;
    let mut state = 0.0;
    for t in 1..=layout.horizon() {
        for i in 0..m {
            let fit = truth.alpha[i] + layout.obs_regressor(t, i) * truth.activations[(t, i)];
            obs += normal_ln_pdf(data.series[(t - 1, i)] - fit, truth.obs_var);
            if truth.state_var > 0.0 {
                let mean: f64 = (0..m)
                    .map(|j| truth.phi[(i, j)] * layout.lagged_regressor(t, j) * truth.activations[(t - 1, j)])
                    .sum();
                state += normal_ln_pdf(truth.activations[(t, i)] - mean, truth.state_var);
            }
        }
    }
    Ok((obs, state))
}

/// Simulate the connectivity model with static trends:
/// `y_{t,i} = α_i + x^obs_{t,i} θ_{t,i} + v_{t,i}`,
/// `θ_{t,i} = Σ_j φ_ij x^lag_{t-1,j} θ_{t-1,j} + w_{t,i}`, `θ_0 = 0`.
pub fn simulate_trivariate(
    recipe: &SimRecipe,
    obs_x: &DMatrix<f64>,
    trans_x: &DMatrix<f64>,
) -> Result<(Dataset, ConnectivityTruth)> {
    recipe.validate()?;
    let m = recipe.n_regions();
    let horizon = recipe.horizon;
    if obs_x.shape() != (horizon, m) || trans_x.shape() != (horizon, m) {
        return Err(Error::input(format!("regressors must be {horizon}x{m}")));
    }
    let layout = ConnectivityLayout::new(true, obs_x.clone(), trans_x.clone())?;
    let phi = recipe.phi_matrix();
    let obs_sd = recipe.obs_var().sqrt();
    let state_sd = recipe.state_var.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(recipe.seed);

    let mut activations = DMatrix::zeros(horizon + 1, m);
    let mut y = DMatrix::zeros(horizon, m);
    for t in 1..=horizon {
        let prev = DVector::from_fn(m, |j, _| layout.lagged_regressor(t, j) * activations[(t - 1, j)]);
        let mean = &phi * prev;
        for i in 0..m {
            let w: f64 = rng.sample(StandardNormal);
            activations[(t, i)] = mean[i] + state_sd * w;
        }
        for i in 0..m {
            let v: f64 = rng.sample(StandardNormal);
            y[(t - 1, i)] = recipe.alpha[i] + layout.obs_regressor(t, i) * activations[(t, i)] + obs_sd * v;
        }
    }
    let labels = (1..=m).map(|i| format!("region_{i}")).collect();
    let data = Dataset::new(y, obs_x.clone(), labels, recipe.tr)?;
    let mut truth = ConnectivityTruth {
        phi,
        alpha: recipe.alpha.clone(),
        obs_var: recipe.obs_var(),
        state_var: recipe.state_var,
        activations,
        obs_loglik: 0.0,
        state_loglik: 0.0,
    };
    let (obs, state) = truth_loglik(&data, &truth, trans_x)?;
    truth.obs_loglik = obs;
    truth.state_loglik = state;
    Ok((data, truth))
}
