//! Gibbs sampler for the sparse connectivity DLM.
//!
//! One sweep, in order:
//! 1. states by forward filtering, backward sampling;
//! 2. observation precisions `λ_y,i`;
//! 3. the state-variance hierarchy (`ω`, `λ_θ`, `ρ`, `β`, `ξ`, `ν`, grid weights);
//! 4. each connectivity coefficient through its spike-and-slab conditional;
//! 5. the inclusion weight `π`;
//! 6. the slab precisions `τ_ij`.

mod draws;
mod state;
mod updates;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use draws::{Draw, DrawsStore, SamplerWarnings};
pub use state::ChainState;
pub use updates::{
    sample_states, update_connectivity, update_hierarchy, update_inclusion_weight,
    update_obs_precision, update_slab_precisions, ConnectivityDraw, Lagged,
};

use crate::error::{Error, Result};
use crate::priors::{GammaParams, HierarchyPrior, PointMassPrior};
use crate::structure::ConnectivityLayout;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorSettings {
    pub point_mass: PointMassPrior,
    pub obs_precision: GammaParams,
    pub hierarchy: HierarchyPrior,
    /// Prior variance of each trend `α_i`.
    pub trend_var: f64,
    /// Prior variance of each initial activation `θ_{0,i}`.
    pub state0_var: f64,
}

impl Default for PriorSettings {
    fn default() -> Self {
        Self {
            point_mass: PointMassPrior::default(),
            obs_precision: GammaParams {
                shape: 0.001,
                rate: 0.001,
            },
            hierarchy: HierarchyPrior::default(),
            trend_var: 100.0,
            state0_var: 10.0,
        }
    }
}

impl PriorSettings {
    pub fn validate(&self) -> Result<()> {
        self.point_mass.validate()?;
        GammaParams::new(self.obs_precision.shape, self.obs_precision.rate)?;
        self.hierarchy.validate()?;
        if !(self.trend_var > 0.0 && self.state0_var > 0.0) {
            return Err(Error::input("initial state variances must be positive"));
        }
        Ok(())
    }
}

/// How the activation variance multipliers are treated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatePrecision {
    /// Beta-prime hierarchy on `λ_θ,i` with local `ω_{t,i}`.
    Hierarchical,
    /// `λ_θ,i` fixed at the given values and `ω ≡ 1`.
    Known(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    /// `T x m` observations.
    pub y: DMatrix<f64>,
    pub layout: ConnectivityLayout,
    pub priors: PriorSettings,
    pub state_precision: StatePrecision,
}

impl ModelSpec {
    pub fn new(y: DMatrix<f64>, layout: ConnectivityLayout) -> Result<Self> {
        let spec = Self {
            y,
            layout,
            priors: PriorSettings::default(),
            state_precision: StatePrecision::Hierarchical,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_priors(mut self, priors: PriorSettings) -> Self {
        self.priors = priors;
        self
    }

    pub fn with_state_precision(mut self, sp: StatePrecision) -> Self {
        self.state_precision = sp;
        self
    }

    pub fn n_regions(&self) -> usize {
        self.layout.n_regions()
    }

    pub fn horizon(&self) -> usize {
        self.y.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        if self.y.nrows() != self.layout.horizon() || self.y.ncols() != self.layout.n_regions() {
            return Err(Error::input(format!(
                "data are {}x{} but regressors are {}x{}",
                self.y.nrows(),
                self.y.ncols(),
                self.layout.horizon(),
                self.layout.n_regions()
            )));
        }
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("observations must be finite"));
        }
        self.priors.validate()?;
        if let StatePrecision::Known(l) = &self.state_precision {
            if l.len() != self.n_regions() || l.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::input("known state precisions must be positive, one per region"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcConfig {
    /// Total sweeps including burn-in.
    pub n_iter: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub n_chains: usize,
    /// Coefficients `(i, j)` (0-based) held at exactly zero.
    pub phi_mask: Vec<(usize, usize)>,
    /// Keep every retained state path and `ω` trace, not just their means.
    pub store_states: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            n_iter: 40_000,
            burn_in: 10_000,
            thin: 4,
            seed: 1,
            n_chains: 1,
            phi_mask: Vec::new(),
            store_states: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self, n_regions: usize) -> Result<()> {
        if self.n_iter <= self.burn_in {
            return Err(Error::input("n_iter must exceed burn_in"));
        }
        if self.thin == 0 {
            return Err(Error::input("thin must be at least 1"));
        }
        if self.n_chains == 0 {
            return Err(Error::input("n_chains must be at least 1"));
        }
        if let Some(&(i, j)) = self.phi_mask.iter().find(|&&(i, j)| i >= n_regions || j >= n_regions) {
            return Err(Error::input(format!("phi mask entry ({i}, {j}) out of range")));
        }
        Ok(())
    }

    pub fn retained_per_chain(&self) -> usize {
        (self.n_iter - self.burn_in) / self.thin
    }

    fn is_retained(&self, iteration: usize) -> bool {
        iteration > self.burn_in && (iteration - self.burn_in) % self.thin == 0
    }
}

/// Independent random stream for one chain.
pub fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

/// One full Gibbs sweep. The filter log-likelihood of the state draw is
/// left in `state.loglik`.
pub fn gibbs_sweep<R: rand::Rng + ?Sized>(
    spec: &ModelSpec,
    mask: &[bool],
    state: &mut ChainState,
    warnings: &mut SamplerWarnings,
    rng: &mut R,
) -> Result<()> {
    let path = sample_states(spec, state, rng)?;
    warnings.pinv_fallbacks += path.pinv_fallbacks;
    state.theta = path.theta;
    let lagged = Lagged::new(spec, state);

    state.lambda_y = update_obs_precision(spec, state, &lagged, rng)?;
    if spec.state_precision == StatePrecision::Hierarchical {
        state.hierarchy = update_hierarchy(spec, state, &lagged, rng)?;
    }
    let m = spec.n_regions();
    for i in 0..m {
        for j in 0..m {
            if mask[i * m + j] {
                continue;
            }
            let d = update_connectivity(spec, state, &lagged, (i, j), rng);
            if d.zero_regressor {
                warnings.zero_regressor += 1;
            }
            if !d.phi.is_finite() {
                return Err(Error::NonFinite {
                    iteration: 0,
                    parameter: format!("phi_{}_{}", i + 1, j + 1),
                });
            }
            state.phi[(i, j)] = d.phi;
            state.included[i * m + j] = d.included;
        }
    }
    state.pi = update_inclusion_weight(spec, state, mask, rng);
    state.tau = update_slab_precisions(spec, state, mask, rng);
    state.check_finite()?;
    Ok(())
}

fn mask_vector(cfg: &McmcConfig, m: usize) -> Vec<bool> {
    let mut mask = vec![false; m * m];
    for &(i, j) in &cfg.phi_mask {
        mask[i * m + j] = true;
    }
    mask
}

/// Run one chain (`chain` selects the random stream).
pub fn run_single_chain(spec: &ModelSpec, cfg: &McmcConfig, chain: usize) -> Result<DrawsStore> {
    spec.validate()?;
    cfg.validate(spec.n_regions())?;
    let m = spec.n_regions();
    let mask = mask_vector(cfg, m);
    let mut rng = chain_rng(cfg.seed, chain);
    let mut state = ChainState::initial(spec);
    let mut store = DrawsStore::new(spec, 1);
    let mut warnings = SamplerWarnings::default();

    for iteration in 1..=cfg.n_iter {
        gibbs_sweep(spec, &mask, &mut state, &mut warnings, &mut rng).map_err(|e| match e {
            Error::NonFinite { parameter, .. } => Error::NonFinite { iteration, parameter },
            other => Error::ChainAborted {
                iteration,
                source: Box::new(other),
            },
        })?;
        if cfg.is_retained(iteration) {
            store.push(Draw::from_state(&state, chain, iteration, cfg.store_states));
            store.accumulate_means(&state);
        }
    }
    store.warnings = warnings;
    store.finish_means();
    Ok(store)
}

/// Run `cfg.n_chains` chains (in parallel) and merge their draws in chain
/// order.
pub fn run_chain(spec: &ModelSpec, cfg: &McmcConfig) -> Result<DrawsStore> {
    spec.validate()?;
    cfg.validate(spec.n_regions())?;
    let stores: Vec<DrawsStore> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|chain| run_single_chain(spec, cfg, chain))
        .collect::<Result<_>>()?;
    Ok(DrawsStore::merge(stores))
}
