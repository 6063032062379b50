//! Connectivity and state-variance priors.
//!
//! * Point-mass (spike-and-slab) prior on each connectivity coefficient:
//!   `φ ~ π N(0, 1/τ) + (1 - π) δ_0`, `π ~ Beta(a_π, b_π)`, `τ ~ Gamma(c, d)`.
//! * Beta-prime state-variance hierarchy. For state component `i`,
//!   `W_{t,i}^{-1} = λ_y λ_θ,i ω_{t,i}` with
//!   `ω_{t,i} | ν_i ~ Gamma(ν_i/2, ν_i/2)`,
//!   `λ_θ,i ~ Gamma((ν_i-1)/2, rate ρ_i β_i)`, `ρ_i ~ Gamma(1, 1)`,
//!   `β_i ~ Gamma(1, ξ_i)`, `ξ_i ~ Gamma(1, 1)`,
//!   `ν_i ~ Multinomial(1, φ_i)` over a finite grid, `φ_i ~ Dirichlet(α)`.
//!
//! All Gamma distributions here are shape/rate.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `τ_0` as published for the slab precision elicitation.
pub const PUBLISHED_SLAB_TAU0: f64 = 1.82;
/// Rate `d` used with the published `τ_0`.
pub const PUBLISHED_SLAB_RATE: f64 = 1.53;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaParams {
    pub shape: f64,
    pub rate: f64,
}

impl GammaParams {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        if !(shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite()) {
            return Err(Error::input(format!(
                "Gamma parameters must be positive and finite (shape={shape}, rate={rate})"
            )));
        }
        Ok(Self { shape, rate })
    }

    pub fn mean(&self) -> f64 {
        self.shape / self.rate
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_gamma(self.shape, self.rate, rng)
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        gamma_ln_pdf(x, self.shape, self.rate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaParams {
    pub a: f64,
    pub b: f64,
}

impl BetaParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::input(format!(
                "Beta parameters must be positive and finite (a={a}, b={b})"
            )));
        }
        Ok(Self { a, b })
    }

    pub fn mean(&self) -> f64 {
        self.a / (self.a + self.b)
    }

    pub fn sd(&self) -> f64 {
        let s = self.a + self.b;
        (self.a * self.b / (s * s * (s + 1.0))).sqrt()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_beta(self.a, self.b, rng)
    }
}

/// Gamma(shape, rate) draw.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    Gamma::new(shape, 1.0 / rate)
        .expect("gamma parameters validated by caller")
        .sample(rng)
}

/// Beta draw via two Gammas; stays inside (0, 1) unless both underflow.
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> f64 {
    let x = sample_gamma(a, 1.0, rng);
    let y = sample_gamma(b, 1.0, rng);
    x / (x + y)
}

/// Dirichlet draw via normalised Gammas.
pub fn sample_dirichlet<R: Rng + ?Sized>(alpha: &[f64], rng: &mut R) -> Vec<f64> {
    let mut g: Vec<f64> = alpha.iter().map(|&a| sample_gamma(a, 1.0, rng)).collect();
    let total: f64 = g.iter().sum();
    g.iter_mut().for_each(|x| *x /= total);
    g
}

pub fn gamma_ln_pdf(x: f64, shape: f64, rate: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    shape * rate.ln() - ln_gamma(shape) + (shape - 1.0) * x.ln() - rate * x
}

fn normal_ln_pdf(x: f64, mean: f64, var: f64) -> f64 {
    -0.5 * ((2.0 * PI * var).ln() + (x - mean) * (x - mean) / var)
}

/// Beta-prime density with shapes `p`, `q` and scale `beta`.
pub fn beta_prime_density(x: f64, p: f64, q: f64, beta: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0 && beta > 0.0) {
        return Err(Error::input(format!(
            "beta prime parameters must be positive (p={p}, q={q}, beta={beta})"
        )));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::input(format!("beta prime support is x >= 0, got {x}")));
    }
    let z = x / beta;
    if z == 0.0 {
        return Ok(match p {
            p if p < 1.0 => f64::INFINITY,
            p if p > 1.0 => 0.0,
            _ => q / beta,
        });
    }
    let ln_norm = ln_gamma(p + q) - ln_gamma(p) - ln_gamma(q);
    Ok((ln_norm - beta.ln() + (p - 1.0) * z.ln() - (p + q) * z.ln_1p()).exp())
}

/// Beta-prime CDF: `I_{x/(x+β)}(p, q)`.
pub fn beta_prime_cdf(x: f64, p: f64, q: f64, beta: f64) -> Result<f64> {
    beta_prime_density(x, p, q, beta)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    Ok(beta_reg(p, q, x / (x + beta)))
}

/// Draw from Beta-prime(1, q, scale β) through its Gamma mixture:
/// `ρ ~ Gamma(q, 1)`, then `τ² | ρ ~ Gamma(1, rate ρ/β)`.
pub fn sample_beta_prime_mixture<R: Rng + ?Sized>(q: f64, beta: f64, rng: &mut R) -> Result<f64> {
    if !(q > 0.0 && beta > 0.0 && q.is_finite() && beta.is_finite()) {
        return Err(Error::input(format!(
            "mixture parameters must be positive (q={q}, beta={beta})"
        )));
    }
    let rho = sample_gamma(q, 1.0, rng);
    Ok(sample_gamma(1.0, rho / beta, rng))
}

/// Closed-form marginal prior of a state given its conditional mean once the
/// Beta-prime variance has been integrated out:
/// `(ν-1) / (2 s (1 + |θ-mean|/s)^ν)` with `s = sqrt(σ ν β)`.
pub fn marginal_state_prior_density(theta: f64, mean: f64, sigma: f64, nu: f64, beta: f64) -> Result<f64> {
    if !(nu > 1.0) {
        return Err(Error::input(format!(
            "marginal state prior needs nu > 1 to be normalisable, got {nu}"
        )));
    }
    if !(sigma > 0.0 && beta > 0.0) {
        return Err(Error::input(format!(
            "sigma and beta must be positive (sigma={sigma}, beta={beta})"
        )));
    }
    let s = (sigma * nu * beta).sqrt();
    let z = (theta - mean).abs() / s;
    Ok((nu - 1.0) / (2.0 * s) * (-nu * z.ln_1p()).exp())
}

/// `τ_0 = (q / Φ^{-1}(prob))^{-2}`: the precision that puts probability
/// `prob` below `target_quantile` under a zero-mean Normal.
pub fn slab_tau0_from_quantile(target_quantile: f64, prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::input(format!("prob must lie in (0, 1), got {prob}")));
    }
    if !(target_quantile < 0.0) || prob >= 0.5 {
        return Err(Error::input(
            "left-tail elicitation needs target_quantile < 0 and prob < 0.5",
        ));
    }
    let z = statrs::function::erf::erfc_inv(2.0 * prob) * -std::f64::consts::SQRT_2;
    Ok((target_quantile / z).powi(-2))
}

/// Gamma(c, d) prior on the slab precision whose mode equals `τ_0`:
/// `c = τ_0 d + 1`.
pub fn elicit_slab_precision(tau0: f64, rate_d: f64) -> Result<GammaParams> {
    if !(tau0 >= 0.0 && tau0.is_finite()) {
        return Err(Error::input(format!("tau0 must be non-negative, got {tau0}")));
    }
    GammaParams::new(tau0 * rate_d + 1.0, rate_d)
}

/// Both elicitation routes from a left-tail quantile statement.
pub fn elicit_slab_precision_from_quantile(
    target_quantile: f64,
    prob: f64,
    rate_d: f64,
) -> Result<(f64, GammaParams)> {
    let tau0 = slab_tau0_from_quantile(target_quantile, prob)?;
    Ok((tau0, elicit_slab_precision(tau0, rate_d)?))
}

pub fn elicit_inclusion_prior(a: f64, b: f64) -> Result<BetaParams> {
    BetaParams::new(a, b)
}

/// Log prior mass/density of one connectivity coefficient. An exact zero is
/// the atom; anything else is scored under the slab.
pub fn point_mass_log_prior(phi: f64, pi: f64, tau: f64) -> f64 {
    if phi == 0.0 {
        (1.0 - pi).ln()
    } else {
        pi.ln() + normal_ln_pdf(phi, 0.0, 1.0 / tau)
    }
}

/// Hyperparameters of the point-mass connectivity prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointMassPrior {
    pub inclusion: BetaParams,
    pub slab_precision: GammaParams,
}

impl PointMassPrior {
    pub fn new(a_pi: f64, b_pi: f64, c: f64, d: f64) -> Result<Self> {
        Ok(Self {
            inclusion: BetaParams::new(a_pi, b_pi)?,
            slab_precision: GammaParams::new(c, d)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        BetaParams::new(self.inclusion.a, self.inclusion.b)?;
        GammaParams::new(self.slab_precision.shape, self.slab_precision.rate)?;
        Ok(())
    }
}

impl Default for PointMassPrior {
    /// Beta(6, 3) inclusion weight and the published slab elicitation.
    fn default() -> Self {
        Self {
            inclusion: BetaParams { a: 6.0, b: 3.0 },
            slab_precision: elicit_slab_precision(PUBLISHED_SLAB_TAU0, PUBLISHED_SLAB_RATE)
                .expect("published constants are valid"),
        }
    }
}

/// Degrees-of-freedom grid and Dirichlet concentration for the hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyPrior {
    pub nu_grid: Vec<f64>,
    pub dirichlet_alpha: Vec<f64>,
}

impl Default for HierarchyPrior {
    fn default() -> Self {
        let nu_grid = vec![2.0, 3.0, 5.0, 10.0, 20.0, 50.0];
        let dirichlet_alpha = vec![1.0; nu_grid.len()];
        Self {
            nu_grid,
            dirichlet_alpha,
        }
    }
}

impl HierarchyPrior {
    pub fn validate(&self) -> Result<()> {
        if self.nu_grid.is_empty() {
            return Err(Error::input("nu grid is empty"));
        }
        if self.nu_grid.len() != self.dirichlet_alpha.len() {
            return Err(Error::input("nu grid and Dirichlet concentration differ in length"));
        }
        if let Some(nu) = self.nu_grid.iter().find(|&&nu| !(nu > 1.0 && nu.is_finite())) {
            return Err(Error::input(format!("nu grid values must exceed 1, got {nu}")));
        }
        if self.dirichlet_alpha.iter().any(|&a| !(a > 0.0)) {
            return Err(Error::input("Dirichlet concentration must be positive"));
        }
        Ok(())
    }
}

/// Latent variables of one state component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentHierarchy {
    pub lambda_theta: f64,
    /// Local precision multipliers `ω_{t,i}`, `t = 1..=T` at index `t-1`.
    pub omega: Vec<f64>,
    pub rho: f64,
    pub beta: f64,
    pub xi: f64,
    /// Index of the current degrees of freedom in the grid.
    pub nu_index: usize,
    pub varphi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVarianceHierarchy {
    pub prior: HierarchyPrior,
    pub components: Vec<ComponentHierarchy>,
}

impl StateVarianceHierarchy {
    /// Every latent at 1, degrees of freedom at the grid midpoint and
    /// uniform grid weights.
    pub fn initial(prior: &HierarchyPrior, n_components: usize, horizon: usize) -> Self {
        let k = prior.nu_grid.len();
        let comp = ComponentHierarchy {
            lambda_theta: 1.0,
            omega: vec![1.0; horizon],
            rho: 1.0,
            beta: 1.0,
            xi: 1.0,
            nu_index: k / 2,
            varphi: vec![1.0 / k as f64; k],
        };
        Self {
            prior: prior.clone(),
            components: vec![comp; n_components],
        }
    }

    /// Joint draw of every latent from the prior hierarchy.
    pub fn sample_prior<R: Rng + ?Sized>(
        prior: &HierarchyPrior,
        n_components: usize,
        horizon: usize,
        rng: &mut R,
    ) -> Self {
        let components = (0..n_components)
            .map(|_| {
                let xi = sample_gamma(1.0, 1.0, rng);
                let beta = sample_gamma(1.0, xi, rng);
                let rho = sample_gamma(1.0, 1.0, rng);
                let varphi = sample_dirichlet(&prior.dirichlet_alpha, rng);
                let nu_index = sample_categorical(&varphi, rng);
                let nu = prior.nu_grid[nu_index];
                let lambda_theta = sample_gamma((nu - 1.0) / 2.0, rho * beta, rng);
                let omega = (0..horizon).map(|_| sample_gamma(nu / 2.0, nu / 2.0, rng)).collect();
                ComponentHierarchy {
                    lambda_theta,
                    omega,
                    rho,
                    beta,
                    xi,
                    nu_index,
                    varphi,
                }
            })
            .collect();
        Self {
            prior: prior.clone(),
            components,
        }
    }

    pub fn nu(&self, component: usize) -> f64 {
        self.prior.nu_grid[self.components[component].nu_index]
    }
}

/// Index drawn with probability proportional to `weights`.
pub fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            return k;
        }
        u -= w;
    }
    weights.len() - 1
}
