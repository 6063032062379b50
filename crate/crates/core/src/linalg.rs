//! Small dense helpers shared by the filter, the backward sampler and the
//! simulators. Everything here works on `nalgebra` dynamic matrices.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

/// Relative eigenvalue floor for PSD checks: `λ_min ≥ -PSD_RTOL · λ_max`.
pub const PSD_RTOL: f64 = 1e-10;

/// `(A + A') / 2`. Floating-point addition is commutative, so the result is
/// exactly symmetric.
pub fn symmetrize(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a + a.transpose()) * 0.5
}

pub fn symmetrize_mut(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Outcome of projecting a symmetric matrix onto the PSD cone.
pub enum PsdCheck {
    /// Eigenvalues were all above the tolerance floor; small negatives were
    /// clipped to zero. Carries the reconstructed matrix and its eigenvalues.
    Psd {
        matrix: DMatrix<f64>,
        eigenvalues: DVector<f64>,
    },
    /// Smallest eigenvalue is below `-PSD_RTOL · λ_max`.
    NotPsd { min_eigenvalue: f64, max_eigenvalue: f64 },
}

pub fn check_psd(a: &DMatrix<f64>) -> PsdCheck {
    let eig = SymmetricEigen::new(symmetrize(a));
    let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    if min < -PSD_RTOL * max.max(0.0) || !min.is_finite() {
        return PsdCheck::NotPsd {
            min_eigenvalue: min,
            max_eigenvalue: max,
        };
    }
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let u = &eig.eigenvectors;
    let matrix = symmetrize(&(u * DMatrix::from_diagonal(&clipped) * u.transpose()));
    PsdCheck::Psd {
        matrix,
        eigenvalues: clipped,
    }
}

pub fn is_psd(a: &DMatrix<f64>) -> bool {
    matches!(check_psd(a), PsdCheck::Psd { .. })
}

/// Lower-triangular factor `L` with `L L' ≈ A` for a symmetric PSD `A`,
/// tolerating exactly singular directions (zero pivots give zero columns).
/// Returns `None` when a pivot is clearly negative.
pub fn psd_cholesky(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0_f64, f64::max);
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d < -1e3 * tol {
            return None;
        }
        if d <= tol {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Moore–Penrose pseudo-inverse of a symmetric matrix via its eigenbasis.
pub fn pinv_symmetric(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(a));
    let max = eig.eigenvalues.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
    let cutoff = max * 1e-12 * a.nrows() as f64;
    let inv = eig
        .eigenvalues
        .map(|v| if v.abs() > cutoff { 1.0 / v } else { 0.0 });
    let u = &eig.eigenvectors;
    symmetrize(&(u * DMatrix::from_diagonal(&inv) * u.transpose()))
}

pub fn standard_normal_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// Draw from `N(mean, cov)` for a PSD (possibly singular) covariance.
/// Falls back to an eigen factorisation when the semi-definite Cholesky
/// rejects the matrix.
pub fn sample_mvn<R: Rng + ?Sized>(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    rng: &mut R,
) -> DVector<f64> {
    let z = standard_normal_vector(mean.len(), rng);
    match psd_cholesky(cov) {
        Some(l) => mean + l * z,
        None => {
            let eig = SymmetricEigen::new(symmetrize(cov));
            let root = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
            mean + &eig.eigenvectors * DMatrix::from_diagonal(&root) * z
        }
    }
}
