//! Block layout of the connectivity model.
//!
//! With `m` regions the state is `(α_1..α_m, θ_{t,1}..θ_{t,m})` when trends
//! are included and `(θ_{t,1}..θ_{t,m})` otherwise.
//!
//! ```text
//! y_{t,i} = α_i + x^obs_{t,i} θ_{t,i} + v_{t,i}
//! θ_{t,i} = Σ_j φ_ij x^lag_{t-1,j} θ_{t-1,j} + w_{t,i}
//! ```
//!
//! Trends evolve with identity dynamics and zero noise. The lagged regressor
//! for the first step reuses the first row (`x_0 := x_1`).

use nalgebra::{DMatrix, DVector};

use crate::dlm::{DlmModel, TimeVarying};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityLayout {
    n_regions: usize,
    include_trend: bool,
    /// `T x m` regressors multiplying each activation in the observation equation.
    obs_x: DMatrix<f64>,
    /// `T x m` regressors whose lag scales each transition column.
    trans_x: DMatrix<f64>,
}

impl ConnectivityLayout {
    pub fn new(include_trend: bool, obs_x: DMatrix<f64>, trans_x: DMatrix<f64>) -> Result<Self> {
        let (horizon, m) = obs_x.shape();
        if horizon == 0 || m == 0 {
            return Err(Error::input("regressors must be non-empty"));
        }
        if trans_x.shape() != (horizon, m) {
            return Err(Error::input(format!(
                "transition regressors are {:?}, observation regressors {:?}",
                trans_x.shape(),
                obs_x.shape()
            )));
        }
        if obs_x.iter().chain(trans_x.iter()).any(|v| !v.is_finite()) {
            return Err(Error::input("regressors must be finite"));
        }
        Ok(Self {
            n_regions: m,
            include_trend,
            obs_x,
            trans_x,
        })
    }

    /// Activation-only layout with unit regressors: a plain VAR(1) state
    /// observed with noise. With one region this is the univariate
    /// `y_t = θ_t + v_t`, `θ_t = φ θ_{t-1} + w_t` model.
    pub fn plain(n_regions: usize, horizon: usize) -> Result<Self> {
        let ones = DMatrix::from_element(horizon, n_regions, 1.0);
        Self::new(false, ones.clone(), ones)
    }

    pub fn n_regions(&self) -> usize {
        self.n_regions
    }

    pub fn include_trend(&self) -> bool {
        self.include_trend
    }

    pub fn horizon(&self) -> usize {
        self.obs_x.nrows()
    }

    pub fn state_dim(&self) -> usize {
        if self.include_trend {
            2 * self.n_regions
        } else {
            self.n_regions
        }
    }

    /// Offset of the first activation component in the state vector.
    pub fn activation_offset(&self) -> usize {
        if self.include_trend {
            self.n_regions
        } else {
            0
        }
    }

    pub fn obs_x(&self) -> &DMatrix<f64> {
        &self.obs_x
    }

    pub fn trans_x(&self) -> &DMatrix<f64> {
        &self.trans_x
    }

    /// `x^obs_{t,i}` for 1-based `t`.
    #[inline]
    pub fn obs_regressor(&self, t: usize, i: usize) -> f64 {
        self.obs_x[(t - 1, i)]
    }

    /// `x^lag_{t-1,j}` used by `G_t` (1-based `t`).
    #[inline]
    pub fn lagged_regressor(&self, t: usize, j: usize) -> f64 {
        self.trans_x[(t.saturating_sub(2), j)]
    }

    pub fn f_matrix(&self, t: usize) -> DMatrix<f64> {
        let m = self.n_regions;
        let off = self.activation_offset();
        let mut f = DMatrix::zeros(m, self.state_dim());
        for i in 0..m {
            if self.include_trend {
                f[(i, i)] = 1.0;
            }
            f[(i, off + i)] = self.obs_regressor(t, i);
        }
        f
    }

    pub fn g_matrix(&self, t: usize, phi: &DMatrix<f64>) -> DMatrix<f64> {
        let m = self.n_regions;
        let off = self.activation_offset();
        let p = self.state_dim();
        let mut g = DMatrix::zeros(p, p);
        for i in 0..off {
            g[(i, i)] = 1.0;
        }
        for i in 0..m {
            for j in 0..m {
                g[(off + i, off + j)] = phi[(i, j)] * self.lagged_regressor(t, j);
            }
        }
        g
    }

    /// Diagonal `W_t` with zero trend block and activation variances given by
    /// `state_var(t, i)`.
    pub fn w_matrix(&self, t: usize, state_var: &impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
        let off = self.activation_offset();
        let p = self.state_dim();
        let mut w = DMatrix::zeros(p, p);
        for i in 0..self.n_regions {
            w[(off + i, off + i)] = state_var(t, i);
        }
        w
    }

    /// Prior moments: zero mean, variance `trend_var` on trends and
    /// `state0_var` on initial activations.
    pub fn initial_moments(&self, trend_var: f64, state0_var: f64) -> (DVector<f64>, DMatrix<f64>) {
        let p = self.state_dim();
        let off = self.activation_offset();
        let diag = DVector::from_fn(p, |k, _| if k < off { trend_var } else { state0_var });
        (DVector::zeros(p), DMatrix::from_diagonal(&diag))
    }

    /// Assemble the full DLM for given connectivity, observation variances
    /// and activation variances.
    pub fn build_model(
        &self,
        phi: &DMatrix<f64>,
        obs_var: &[f64],
        state_var: impl Fn(usize, usize) -> f64,
        m0: DVector<f64>,
        c0: DMatrix<f64>,
    ) -> Result<DlmModel> {
        let horizon = self.horizon();
        if phi.shape() != (self.n_regions, self.n_regions) || obs_var.len() != self.n_regions {
            return Err(Error::input("connectivity or observation variance has wrong size"));
        }
        let f: Vec<_> = (1..=horizon).map(|t| self.f_matrix(t)).collect();
        let g: Vec<_> = (1..=horizon).map(|t| self.g_matrix(t, phi)).collect();
        let w: Vec<_> = (1..=horizon).map(|t| self.w_matrix(t, &state_var)).collect();
        let v = DMatrix::from_diagonal(&DVector::from_column_slice(obs_var));
        DlmModel::new(f, g, v, w, m0, c0, horizon)
    }

    /// Same as [`build_model`](Self::build_model) without validation; the
    /// sampler only produces positive diagonal variances.
    pub(crate) fn build_model_unchecked(
        &self,
        phi: &DMatrix<f64>,
        obs_var: &[f64],
        state_var: impl Fn(usize, usize) -> f64,
        m0: DVector<f64>,
        c0: DMatrix<f64>,
        f: &TimeVarying,
    ) -> DlmModel {
        let horizon = self.horizon();
        let g: Vec<_> = (1..=horizon).map(|t| self.g_matrix(t, phi)).collect();
        let w: Vec<_> = (1..=horizon).map(|t| self.w_matrix(t, &state_var)).collect();
        let v = DMatrix::from_diagonal(&DVector::from_column_slice(obs_var));
        DlmModel::new_unchecked(f.clone(), g.into(), v, w.into(), m0, c0, horizon)
    }

    pub(crate) fn f_series(&self) -> TimeVarying {
        TimeVarying::Varying((1..=self.horizon()).map(|t| self.f_matrix(t)).collect())
    }
}
