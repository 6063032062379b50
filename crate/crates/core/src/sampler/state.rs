use nalgebra::{DMatrix, DVector};

use super::{ModelSpec, StatePrecision};
use crate::error::{Error, Result};
use crate::priors::StateVarianceHierarchy;

/// Current values of every unknown in the model.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    /// `θ_0..θ_T`.
    pub theta: Vec<DVector<f64>>,
    pub lambda_y: Vec<f64>,
    pub hierarchy: StateVarianceHierarchy,
    pub phi: DMatrix<f64>,
    /// Inclusion indicators, row-major `i * m + j`.
    pub included: Vec<bool>,
    pub pi: f64,
    pub tau: DMatrix<f64>,
    /// Log-likelihood of the last filter pass.
    pub loglik: f64,
}

impl ChainState {
    /// Cold start: `λ_y` from the inverse sample variance of each series,
    /// every coefficient in the spike, `π` and `τ` at their prior means,
    /// hierarchy latents at 1.
    pub fn initial(spec: &ModelSpec) -> Self {
        let m = spec.n_regions();
        let horizon = spec.horizon();
        let lambda_y = (0..m)
            .map(|i| {
                let col = spec.y.column(i);
                let n = col.len() as f64;
                let mean = col.sum() / n;
                let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
                if var > 0.0 && var.is_finite() {
                    1.0 / var
                } else {
                    1.0
                }
            })
            .collect();
        let mut hierarchy = StateVarianceHierarchy::initial(&spec.priors.hierarchy, m, horizon);
        if let StatePrecision::Known(values) = &spec.state_precision {
            for (c, &v) in hierarchy.components.iter_mut().zip(values) {
                c.lambda_theta = v;
            }
        }
        let pm = &spec.priors.point_mass;
        Self {
            theta: vec![DVector::zeros(spec.layout.state_dim()); horizon + 1],
            lambda_y,
            hierarchy,
            phi: DMatrix::zeros(m, m),
            included: vec![false; m * m],
            pi: pm.inclusion.mean(),
            tau: DMatrix::from_element(m, m, pm.slab_precision.mean()),
            loglik: f64::NAN,
        }
    }

    /// Activation noise variance `1 / (λ_y,i λ_θ,i ω_{t,i})` at 1-based `t`.
    #[inline]
    pub fn state_variance(&self, t: usize, i: usize) -> f64 {
        1.0 / self.state_precision(t, i)
    }

    #[inline]
    pub fn state_precision(&self, t: usize, i: usize) -> f64 {
        let c = &self.hierarchy.components[i];
        self.lambda_y[i] * c.lambda_theta * c.omega[t - 1]
    }

    pub fn n_included(&self) -> usize {
        self.included.iter().filter(|&&b| b).count()
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        let bad = |parameter: String| Error::NonFinite {
            iteration: 0,
            parameter,
        };
        for (i, &l) in self.lambda_y.iter().enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(bad(format!("lambda_y_{}", i + 1)));
            }
        }
        for (i, c) in self.hierarchy.components.iter().enumerate() {
            let named = [
                ("lambda_theta", c.lambda_theta),
                ("rho", c.rho),
                ("beta", c.beta),
                ("xi", c.xi),
            ];
            for (name, v) in named {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(bad(format!("{name}_{}", i + 1)));
                }
            }
            if c.omega.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
                return Err(bad(format!("omega_{}", i + 1)));
            }
        }
        if !(self.pi >= 0.0 && self.pi <= 1.0) {
            return Err(bad("pi".into()));
        }
        if self.tau.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(bad("tau".into()));
        }
        if self.theta.iter().any(|th| th.iter().any(|v| !v.is_finite())) {
            return Err(bad("theta".into()));
        }
        Ok(())
    }
}
