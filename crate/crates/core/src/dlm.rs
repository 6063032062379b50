//! Gaussian dynamic linear models with time-varying system matrices.
//!
//! Observation: `y_t = F_t θ_t + v_t`, `v_t ~ N(0, V)`
//! Evolution:   `θ_t = G_t θ_{t-1} + w_t`, `w_t ~ N(0, W_t)`
//! Prior:       `θ_0 ~ N(m0, C0)`
//!
//! `W_t` may have zero rows and columns (static components such as trends).
//! Time indices are 1-based to match the recursions; index 0 is the prior.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, PsdCheck};

/// A system matrix that is either fixed or supplied for each `t = 1..=T`.
#[derive(Debug, Clone)]
pub enum TimeVarying {
    Constant(DMatrix<f64>),
    Varying(Vec<DMatrix<f64>>),
}

impl TimeVarying {
    /// Matrix at time `t` (1-based).
    #[inline]
    pub fn at(&self, t: usize) -> &DMatrix<f64> {
        match self {
            TimeVarying::Constant(m) => m,
            TimeVarying::Varying(v) => &v[t - 1],
        }
    }

    fn iter_over(&self, horizon: usize) -> impl Iterator<Item = (usize, &DMatrix<f64>)> {
        (1..=horizon).map(move |t| (t, self.at(t)))
    }
}

impl From<DMatrix<f64>> for TimeVarying {
    fn from(m: DMatrix<f64>) -> Self {
        TimeVarying::Constant(m)
    }
}

impl From<Vec<DMatrix<f64>>> for TimeVarying {
    fn from(v: Vec<DMatrix<f64>>) -> Self {
        TimeVarying::Varying(v)
    }
}

#[derive(Debug, Clone)]
pub struct DlmModel {
    f: TimeVarying,
    g: TimeVarying,
    v: DMatrix<f64>,
    w: TimeVarying,
    m0: DVector<f64>,
    c0: DMatrix<f64>,
    horizon: usize,
}

impl DlmModel {
    /// Build and validate a model: dimensions, finiteness, and PSD-ness of
    /// `V`, every `W_t` and `C0`.
    pub fn new(
        f: impl Into<TimeVarying>,
        g: impl Into<TimeVarying>,
        v: DMatrix<f64>,
        w: impl Into<TimeVarying>,
        m0: DVector<f64>,
        c0: DMatrix<f64>,
        horizon: usize,
    ) -> Result<Self> {
        let model = Self::new_unchecked(f.into(), g.into(), v, w.into(), m0, c0, horizon);
        model.validate()?;
        Ok(model)
    }

    /// Skips validation; callers guarantee the invariants (used inside the
    /// sampler where `V` and `W_t` are diagonal with positive entries).
    pub(crate) fn new_unchecked(
        f: TimeVarying,
        g: TimeVarying,
        v: DMatrix<f64>,
        w: TimeVarying,
        m0: DVector<f64>,
        c0: DMatrix<f64>,
        horizon: usize,
    ) -> Self {
        Self {
            f,
            g,
            v,
            w,
            m0,
            c0,
            horizon,
        }
    }

    fn validate(&self) -> Result<()> {
        let p = self.m0.len();
        let m = self.v.nrows();
        if self.horizon == 0 {
            return Err(Error::input("horizon must be at least 1"));
        }
        if p == 0 || m == 0 {
            return Err(Error::input("state and observation dimensions must be positive"));
        }
        if self.c0.shape() != (p, p) {
            return Err(Error::input(format!("C0 must be {p}x{p}")));
        }
        if self.v.ncols() != m {
            return Err(Error::input("V must be square"));
        }
        for (name, tv) in [("F", &self.f), ("G", &self.g), ("W", &self.w)] {
            if let TimeVarying::Varying(v) = tv {
                if v.len() < self.horizon {
                    return Err(Error::input(format!(
                        "{name} has {} time slices, need {}",
                        v.len(),
                        self.horizon
                    )));
                }
            }
        }
        for (t, f) in self.f.iter_over(self.horizon) {
            if f.shape() != (m, p) {
                return Err(Error::input(format!("F({t}) must be {m}x{p}")));
            }
            if f.iter().any(|x| !x.is_finite()) {
                return Err(Error::input(format!("F({t}) has non-finite entries")));
            }
        }
        for (t, g) in self.g.iter_over(self.horizon) {
            if g.shape() != (p, p) {
                return Err(Error::input(format!("G({t}) must be {p}x{p}")));
            }
            if g.iter().any(|x| !x.is_finite()) {
                return Err(Error::input(format!("G({t}) has non-finite entries")));
            }
        }
        for (t, w) in self.w.iter_over(self.horizon) {
            if w.shape() != (p, p) {
                return Err(Error::input(format!("W({t}) must be {p}x{p}")));
            }
            check_covariance(w, &format!("W({t})"))?;
        }
        check_covariance(&self.v, "V")?;
        check_covariance(&self.c0, "C0")?;
        if self.m0.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("m0 has non-finite entries"));
        }
        Ok(())
    }

    pub fn state_dim(&self) -> usize {
        self.m0.len()
    }

    pub fn obs_dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn f(&self, t: usize) -> &DMatrix<f64> {
        self.f.at(t)
    }

    pub fn g(&self, t: usize) -> &DMatrix<f64> {
        self.g.at(t)
    }

    pub fn w(&self, t: usize) -> &DMatrix<f64> {
        self.w.at(t)
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn m0(&self) -> &DVector<f64> {
        &self.m0
    }

    pub fn c0(&self) -> &DMatrix<f64> {
        &self.c0
    }
}

fn check_covariance(a: &DMatrix<f64>, name: &str) -> Result<()> {
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::input(format!("{name} has non-finite entries")));
    }
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let (x, y) = (a[(i, j)], a[(j, i)]);
            if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                return Err(Error::input(format!("{name} is not symmetric")));
            }
        }
    }
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || a[(i, j)] == 0.0));
    let psd = if diagonal {
        (0..n).all(|i| a[(i, i)] >= 0.0)
    } else {
        linalg::is_psd(a)
    };
    if psd {
        Ok(())
    } else {
        Err(Error::input(format!("{name} is not positive semi-definite")))
    }
}

/// Forward-filtering output. `m` and `c` hold `t = 0..=T`; the remaining
/// vectors hold `t = 1..=T` at index `t - 1`.
#[derive(Debug, Clone)]
pub struct FilterResult {
    pub m: Vec<DVector<f64>>,
    pub c: Vec<DMatrix<f64>>,
    /// Prior state means `a_t = G_t m_{t-1}`.
    pub a: Vec<DVector<f64>>,
    /// Prior state covariances `R_t = G_t C_{t-1} G_t' + W_t`.
    pub r: Vec<DMatrix<f64>>,
    pub f: Vec<DVector<f64>>,
    pub q: Vec<DMatrix<f64>>,
    pub loglik: f64,
}

impl FilterResult {
    pub fn horizon(&self) -> usize {
        self.f.len()
    }
}

/// Cholesky factor of a predictive covariance, applying the PSD tolerance
/// before giving up.
fn predictive_cholesky(q: &DMatrix<f64>, t: usize) -> Result<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if let Some(ch) = q.clone().cholesky() {
        return Ok(ch);
    }
    match linalg::check_psd(q) {
        PsdCheck::NotPsd {
            min_eigenvalue,
            max_eigenvalue,
        } => Err(Error::FilterDivergence {
            t,
            reason: format!(
                "predictive covariance not PSD (eigenvalues in [{min_eigenvalue:e}, {max_eigenvalue:e}])"
            ),
        }),
        PsdCheck::Psd { matrix, eigenvalues } => matrix.cholesky().ok_or_else(|| Error::FilterDivergence {
            t,
            reason: format!(
                "predictive covariance singular (smallest eigenvalue {:e})",
                eigenvalues.min()
            ),
        }),
    }
}

fn check_observations(model: &DlmModel, y: &DMatrix<f64>) -> Result<()> {
    if y.nrows() != model.horizon || y.ncols() != model.obs_dim() {
        return Err(Error::input(format!(
            "observations are {}x{}, model expects {}x{}",
            y.nrows(),
            y.ncols(),
            model.horizon,
            model.obs_dim()
        )));
    }
    if let Some(pos) = y.iter().position(|v| !v.is_finite()) {
        // column-major storage
        let (row, col) = (pos % y.nrows(), pos / y.nrows());
        return Err(Error::input(format!("observation ({}, {col}) is not finite", row + 1)));
    }
    Ok(())
}

/// Exact Kalman filter with Joseph-form covariance update.
///
/// `y` has one row per time point (`T x m`).
pub fn kalman_filter(model: &DlmModel, y: &DMatrix<f64>) -> Result<FilterResult> {
    check_observations(model, y)?;
    let p = model.state_dim();
    let n_obs = model.obs_dim();
    let horizon = model.horizon;
    let ln_2pi = (2.0 * PI).ln();

    let mut out = FilterResult {
        m: Vec::with_capacity(horizon + 1),
        c: Vec::with_capacity(horizon + 1),
        a: Vec::with_capacity(horizon),
        r: Vec::with_capacity(horizon),
        f: Vec::with_capacity(horizon),
        q: Vec::with_capacity(horizon),
        loglik: 0.0,
    };
    out.m.push(model.m0.clone());
    out.c.push(linalg::symmetrize(&model.c0));
    let identity = DMatrix::<f64>::identity(p, p);

    for t in 1..=horizon {
        let g = model.g(t);
        let f = model.f(t);
        let a = g * &out.m[t - 1];
        let mut r = g * &out.c[t - 1] * g.transpose() + model.w(t);
        linalg::symmetrize_mut(&mut r);

        let fc = f * &a;
        let rf = &r * f.transpose();
        let mut q = f * &rf + &model.v;
        linalg::symmetrize_mut(&mut q);

        let chol = predictive_cholesky(&q, t)?;
        let yt = y.row(t - 1).transpose();
        let e = &yt - &fc;
        let qinv_e = chol.solve(&e);
        let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        out.loglik += -0.5 * (n_obs as f64 * ln_2pi + logdet + e.dot(&qinv_e));

        // K = R F' Q^{-1}
        let gain = chol.solve(&rf.transpose()).transpose();
        let m = &a + &gain * &e;
        let i_kf = &identity - &gain * f;
        let mut c = &i_kf * &r * i_kf.transpose() + &gain * &model.v * gain.transpose();
        linalg::symmetrize_mut(&mut c);

        out.m.push(m);
        out.c.push(c);
        out.a.push(a);
        out.r.push(r);
        out.f.push(fc);
        out.q.push(q);
    }
    if !out.loglik.is_finite() {
        return Err(Error::FilterDivergence {
            t: horizon,
            reason: "log-likelihood is not finite".into(),
        });
    }
    Ok(out)
}

/// `log N(y_t; f_t, Q_t)` from a completed filter pass.
pub fn one_step_predictive_density(filt: &FilterResult, t: usize, y_t: &DVector<f64>) -> Result<f64> {
    if t == 0 || t > filt.horizon() {
        return Err(Error::input(format!("t={t} outside 1..={}", filt.horizon())));
    }
    let f = &filt.f[t - 1];
    let q = &filt.q[t - 1];
    if y_t.len() != f.len() {
        return Err(Error::input(format!("y_t has length {}, expected {}", y_t.len(), f.len())));
    }
    let chol = match q.clone().cholesky() {
        Some(ch) => ch,
        None => {
            return Err(Error::SingularPredictive {
                t,
                det: q.determinant(),
            })
        }
    };
    let e = y_t - f;
    let quad = e.dot(&chol.solve(&e));
    let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
    Ok(-0.5 * (f.len() as f64 * (2.0 * PI).ln() + logdet + quad))
}

/// One joint draw of `θ_0..θ_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePath {
    pub theta: Vec<DVector<f64>>,
    /// Number of backward steps that needed a pseudo-inverse of `R_{t+1}`.
    pub pinv_fallbacks: usize,
}

/// Components that evolve as `θ_{t,i} = θ_{t-1,i}` with no noise at step `t`.
fn static_components(g: &DMatrix<f64>, w: &DMatrix<f64>) -> Vec<usize> {
    let p = g.nrows();
    (0..p)
        .filter(|&i| {
            (0..p).all(|j| w[(i, j)] == 0.0)
                && (0..p).all(|j| g[(i, j)] == if i == j { 1.0 } else { 0.0 })
        })
        .collect()
}

/// Forward-filtering backward-sampling: one draw from `p(θ_{0:T} | y_{1:T})`.
pub fn ffbs_sample<R: Rng + ?Sized>(
    model: &DlmModel,
    filt: &FilterResult,
    rng: &mut R,
) -> Result<StatePath> {
    let horizon = filt.horizon();
    if horizon != model.horizon || filt.m.len() != horizon + 1 {
        return Err(Error::input("filter result does not match the model horizon"));
    }
    let mut theta = vec![DVector::<f64>::zeros(model.state_dim()); horizon + 1];
    theta[horizon] = linalg::sample_mvn(&filt.m[horizon], &filt.c[horizon], rng);
    let mut pinv_fallbacks = 0;

    for t in (0..horizon).rev() {
        let g = model.g(t + 1);
        let r_next = &filt.r[t];
        let c_t = &filt.c[t];
        let gc = g * c_t;
        // B' = R^{-1} G C_t
        let bt = match r_next.clone().cholesky() {
            Some(ch) => ch.solve(&gc),
            None => {
                pinv_fallbacks += 1;
                linalg::pinv_symmetric(r_next) * &gc
            }
        };
        let b = bt.transpose();
        let mean = &filt.m[t] + &b * (&theta[t + 1] - &filt.a[t]);
        let mut cov = c_t - &b * &gc;
        linalg::symmetrize_mut(&mut cov);
        let mut draw = linalg::sample_mvn(&mean, &cov, rng);
        for i in static_components(g, model.w(t + 1)) {
            draw[i] = theta[t + 1][i];
        }
        theta[t] = draw;
    }
    Ok(StatePath {
        theta,
        pinv_fallbacks,
    })
}
