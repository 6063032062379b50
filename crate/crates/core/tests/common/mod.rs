//! Test-only oracles that share no code with the library's algorithms.
#![allow(dead_code)]

use bdlm::dlm::{DlmModel, TimeVarying};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Dense joint-Gaussian view of a DLM: the stacked states `θ_0..θ_T` and
/// observations `y_1..y_T` are jointly Gaussian, so every filtering and
/// smoothing moment is a conditional of one big covariance matrix.
pub struct DenseOracle {
    p: usize,
    n_obs: usize,
    horizon: usize,
    mu_theta: DVector<f64>,
    mu_y: DVector<f64>,
    s_tt: DMatrix<f64>,
    s_ty: DMatrix<f64>,
    s_yy: DMatrix<f64>,
    y: DVector<f64>,
}

impl DenseOracle {
    pub fn new(model: &DlmModel, y: &DMatrix<f64>) -> Self {
        let p = model.state_dim();
        let n_obs = model.obs_dim();
        let horizon = model.horizon();
        let n = p * (horizon + 1);

        // θ = μ + A ε, ε = (θ_0 - m0, w_1, ..., w_T) with block-diagonal D.
        let mut a = DMatrix::zeros(n, n);
        let mut d = DMatrix::zeros(n, n);
        let mut mu = DVector::zeros(n);
        mu.rows_mut(0, p).copy_from(model.m0());
        a.view_mut((0, 0), (p, p)).fill_with_identity();
        d.view_mut((0, 0), (p, p)).copy_from(model.c0());
        for t in 1..=horizon {
            let g = model.g(t);
            let prev = mu.rows(p * (t - 1), p).into_owned();
            mu.rows_mut(p * t, p).copy_from(&(g * prev));
            let prev_rows = a.rows(p * (t - 1), p).into_owned();
            let mut rows = g * prev_rows;
            for k in 0..p {
                rows[(k, p * t + k)] += 1.0;
            }
            a.rows_mut(p * t, p).copy_from(&rows);
            d.view_mut((p * t, p * t), (p, p)).copy_from(model.w(t));
        }
        let s_tt = &a * &d * a.transpose();

        let mut h = DMatrix::zeros(n_obs * horizon, n);
        let mut vv = DMatrix::zeros(n_obs * horizon, n_obs * horizon);
        for t in 1..=horizon {
            h.view_mut((n_obs * (t - 1), p * t), (n_obs, p)).copy_from(model.f(t));
            vv.view_mut((n_obs * (t - 1), n_obs * (t - 1)), (n_obs, n_obs))
                .copy_from(model.v());
        }
        let mu_y = &h * &mu;
        let s_ty = &s_tt * h.transpose();
        let s_yy = &h * &s_ty + vv;
        let y_vec = DVector::from_iterator(n_obs * horizon, (0..horizon).flat_map(|t| y.row(t).iter().copied().collect::<Vec<_>>()));
        Self {
            p,
            n_obs,
            horizon,
            mu_theta: mu,
            mu_y,
            s_tt,
            s_ty,
            s_yy,
            y: y_vec,
        }
    }

    /// Moments of the state block rows `rows` given `y_1..y_k`.
    fn condition(&self, rows: std::ops::Range<usize>, k: usize) -> (DVector<f64>, DMatrix<f64>) {
        let len = rows.len();
        let mean = self.mu_theta.rows(rows.start, len).into_owned();
        let cov = self.s_tt.view((rows.start, rows.start), (len, len)).into_owned();
        if k == 0 {
            return (mean, cov);
        }
        let ny = self.n_obs * k;
        let syy = self.s_yy.view((0, 0), (ny, ny)).into_owned();
        let sty = self.s_ty.view((rows.start, 0), (len, ny)).into_owned();
        let resid = self.y.rows(0, ny) - self.mu_y.rows(0, ny);
        let chol = syy.cholesky().expect("observation covariance is positive definite");
        let gain_t = chol.solve(&sty.transpose());
        (mean + gain_t.transpose() * resid, cov - &sty * gain_t)
    }

    /// `(m_t, C_t)`: state `t` given `y_1..y_t`.
    pub fn filtered(&self, t: usize) -> (DVector<f64>, DMatrix<f64>) {
        self.condition(self.p * t..self.p * (t + 1), t)
    }

    /// `(a_t, R_t)`: state `t` given `y_1..y_{t-1}`.
    pub fn predicted(&self, t: usize) -> (DVector<f64>, DMatrix<f64>) {
        self.condition(self.p * t..self.p * (t + 1), t - 1)
    }

    /// `(f_t, Q_t)`: `y_t` given `y_1..y_{t-1}`.
    pub fn forecast(&self, t: usize) -> (DVector<f64>, DMatrix<f64>) {
        let (m, r) = (self.n_obs, self.n_obs * (t - 1));
        let mean = self.mu_y.rows(r, m).into_owned();
        let cov = self.s_yy.view((r, r), (m, m)).into_owned();
        if t == 1 {
            return (mean, cov);
        }
        let syy = self.s_yy.view((0, 0), (r, r)).into_owned();
        let cross = self.s_yy.view((r, 0), (m, r)).into_owned();
        let resid = self.y.rows(0, r) - self.mu_y.rows(0, r);
        let chol = syy.cholesky().unwrap();
        let gain_t = chol.solve(&cross.transpose());
        (mean + gain_t.transpose() * resid, cov - &cross * gain_t)
    }

    /// Joint moments of `θ_0..θ_T` given all observations.
    pub fn smoothed(&self) -> (DVector<f64>, DMatrix<f64>) {
        self.condition(0..self.p * (self.horizon + 1), self.horizon)
    }

    /// `log N(y; μ_y, Σ_yy)`.
    pub fn loglik(&self) -> f64 {
        let n = self.y.len() as f64;
        let chol = self.s_yy.clone().cholesky().unwrap();
        let r = &self.y - &self.mu_y;
        let quad = r.dot(&chol.solve(&r));
        let logdet = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        -0.5 * (n * (2.0 * std::f64::consts::PI).ln() + logdet + quad)
    }
}

pub fn normal_matrix<R: Rng>(rows: usize, cols: usize, sd: f64, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| sd * rng.sample::<f64, _>(StandardNormal))
}

/// `B B'` with `B` of the given rank, plus `ridge · I`.
pub fn random_psd<R: Rng>(n: usize, rank: usize, ridge: f64, rng: &mut R) -> DMatrix<f64> {
    let b = normal_matrix(n, rank, 0.7, rng);
    let mut s = &b * b.transpose();
    for i in 0..n {
        s[(i, i)] += ridge;
    }
    (&s + s.transpose()) * 0.5
}

/// A random small DLM with observations simulated from it. Some models have
/// rank-deficient `W`, a static (copied) component, or time-varying
/// `F`/`G`.
pub fn random_model<R: Rng>(rng: &mut R) -> (DlmModel, DMatrix<f64>) {
    let p = rng.random_range(1..=3);
    let n_obs = rng.random_range(1..=p);
    let horizon = rng.random_range(1..=6);
    let varying = rng.random_bool(0.5);
    let static_comp = p > 1 && rng.random_bool(0.3);
    let w_rank = rng.random_range(0..=p);

    let mut f_list = Vec::new();
    let mut g_list = Vec::new();
    let mut w_list = Vec::new();
    let base_f = normal_matrix(n_obs, p, 1.0, rng);
    // Near-identity transitions keep the backward recursion well conditioned
    // even when W is singular for every t.
    let near_identity = |rng: &mut R| DMatrix::<f64>::identity(p, p) * 0.8 + normal_matrix(p, p, 0.25, rng);
    let base_g = near_identity(rng);
    let base_w = random_psd(p, w_rank, 0.0, rng);
    for _ in 0..horizon {
        let mut f = if varying { normal_matrix(n_obs, p, 1.0, rng) } else { base_f.clone() };
        let mut g = if varying { near_identity(rng) } else { base_g.clone() };
        let mut w = if varying { random_psd(p, w_rank, 0.0, rng) } else { base_w.clone() };
        if static_comp {
            for j in 0..p {
                g[(0, j)] = if j == 0 { 1.0 } else { 0.0 };
                w[(0, j)] = 0.0;
                w[(j, 0)] = 0.0;
            }
            f[(0, 0)] = 1.0;
        }
        f_list.push(f);
        g_list.push(g);
        w_list.push(w);
    }
    let v = random_psd(n_obs, n_obs, 0.2, rng);
    let c0 = random_psd(p, p, 0.5, rng);
    let m0 = normal_matrix(p, 1, 1.0, rng).column(0).into_owned();
    let model = DlmModel::new(
        TimeVarying::Varying(f_list),
        TimeVarying::Varying(g_list),
        v,
        TimeVarying::Varying(w_list),
        m0,
        c0,
        horizon,
    )
    .expect("valid random model");
    let y = simulate(&model, rng);
    (model, y)
}

/// Draw `y_{1:T}` by forward simulation through an eigen square root.
pub fn simulate<R: Rng>(model: &DlmModel, rng: &mut R) -> DMatrix<f64> {
    let n_obs = model.obs_dim();
    let draw = |cov: &DMatrix<f64>, rng: &mut R| {
        let e = cov.clone().symmetric_eigen();
        let z = DVector::from_fn(cov.nrows(), |i, _| {
            e.eigenvalues[i].max(0.0).sqrt() * rng.sample::<f64, _>(StandardNormal)
        });
        &e.eigenvectors * z
    };
    let mut theta = model.m0() + draw(model.c0(), rng);
    let mut y = DMatrix::zeros(model.horizon(), n_obs);
    for t in 1..=model.horizon() {
        theta = model.g(t) * &theta + draw(model.w(t), rng);
        let obs = model.f(t) * &theta + draw(model.v(), rng);
        y.row_mut(t - 1).copy_from(&obs.transpose());
    }
    y
}

/// `||a - b||_F / max(||b||_F, 1)`.
pub fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

pub fn rel_err_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Wilson-Hilferty standard normal approximation to a `χ²_df` statistic.
pub fn chi2_to_z(stat: f64, df: f64) -> f64 {
    let h = 2.0 / (9.0 * df);
    ((stat / df).cbrt() - (1.0 - h)) / h.sqrt()
}

/// Kolmogorov-Smirnov distance between a sample and a CDF.
pub fn ks_distance(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// `∫_a^b f` by tanh-sinh quadrature, halving the step until two levels
/// agree to `1e-13` relative. Endpoint singularities of algebraic type are
/// handled by the double-exponential decay of the weights; `f` is never
/// evaluated at the endpoints.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    let half = 0.5 * (b - a);
    let term = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        // Distance to the nearer endpoint, computed without cancellation.
        let gap = half / (s.abs().exp() * cosh_s);
        if w == 0.0 || gap == 0.0 {
            return 0.0;
        }
        let x = if s >= 0.0 { b - gap } else { a + gap };
        let v = f(x);
        if v.is_finite() { half * w * v } else { 0.0 }
    };
    let t_max = 6.5;
    let mut h = 0.5;
    let mut sum = term(0.0);
    let mut k = 1;
    while k as f64 * h <= t_max {
        sum += term(k as f64 * h) + term(-(k as f64) * h);
        k += 1;
    }
    let mut estimate = h * sum;
    for _ in 0..12 {
        h *= 0.5;
        let mut k = 1;
        while k as f64 * h <= t_max {
            sum += term(k as f64 * h) + term(-(k as f64) * h);
            k += 2;
        }
        let next = h * sum;
        let done = (next - estimate).abs() <= 1e-13 * next.abs().max(1e-300);
        estimate = next;
        if done {
            break;
        }
    }
    estimate
}

/// `∫_0^∞ f` via `x = u / (1 - u)`.
pub fn integrate_half_line(f: impl Fn(f64) -> f64) -> f64 {
    integrate(
        |u| {
            let x = u / (1.0 - u);
            f(x) / ((1.0 - u) * (1.0 - u))
        },
        0.0,
        1.0,
    )
}
