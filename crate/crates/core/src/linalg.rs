//! Dense complex linear algebra shared across the crate.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Relative Hermitian deviation `‖M − M*‖_F / ‖M‖_F` (0 for the zero matrix).
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let total = m.norm();
    if total == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / total
}

pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = hermitian_part(m).symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Eigenvalues of a general square matrix from its complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigensolver("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|k| t[(k, k)]).collect())
}

/// Eigenpairs of a general (diagonalisable) square matrix.
///
/// Eigenvectors come from back-substitution on the upper-triangular Schur
/// factor, mapped back through the unitary factor, and are returned as unit
/// columns. Near-equal diagonal entries are perturbed to `ε‖T‖` in the
/// denominators; a defective matrix shows up as an ill-conditioned
/// eigenvector matrix, which the caller must check.
pub fn general_eig(m: &CMatrix) -> Result<(Vec<Complex64>, CMatrix)> {
    let n = m.nrows();
    let schur = nalgebra::Schur::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::Eigensolver("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let floor = f64::EPSILON * t.norm().max(f64::MIN_POSITIVE);
    let mut vectors = CMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = CVector::zeros(n);
        y[k] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for l in (j + 1)..=k {
                s += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < floor {
                d = c(floor);
            }
            y[j] = -s / d;
        }
        let v = &q * y;
        let norm = v.norm();
        vectors.set_column(k, &(v / c(norm)));
    }
    Ok(((0..n).map(|k| t[(k, k)]).collect(), vectors))
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// 2-norm condition number from the singular values (∞ when singular).
pub fn condition_number(m: &CMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

/// Number of singular values above `rel_tol · σ_max`.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> usize {
    let s = singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&v| v > rel_tol * top).count()
}

/// `‖offdiag(M)‖_F / ‖M‖_F`.
pub fn off_diagonal_mass(m: &CMatrix) -> f64 {
    let total = m.norm();
    if total == 0.0 {
        return 0.0;
    }
    let mut off = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if i != j {
                off += m[(i, j)].norm_sqr();
            }
        }
    }
    off.sqrt() / total
}

/// Operator 2-norm estimate from power iteration on `M*M`.
pub fn operator_norm_estimate(m: &CMatrix, iterations: usize) -> f64 {
    let n = m.ncols();
    if n == 0 {
        return 0.0;
    }
    // deterministic start with no special symmetry
    let mut v = CVector::from_fn(n, |i, _| Complex64::new(1.0 + (i as f64 * 0.618_034).sin(), 0.3));
    v /= c(v.norm());
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let w = m.adjoint() * (m * &v);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        estimate = norm.sqrt();
        v = w / c(norm);
    }
    estimate
}

/// Scalar `s` minimising `‖a − s·b‖_F`.
pub fn best_scalar(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let num: Complex64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let den: f64 = b.iter().map(|x| x.norm_sqr()).sum();
    num / den
}

/// `‖a − b‖_F / ‖a‖_F`.
pub fn relative_deviation(a: &CMatrix, b: &CMatrix) -> f64 {
    let scale = a.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}

/// Largest distance between two spectra after greedy nearest matching.
pub fn spectrum_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let mut best = (f64::INFINITY, usize::MAX);
        for (k, y) in b.iter().enumerate() {
            if !used[k] {
                let d = (x - y).norm();
                if d < best.0 {
                    best = (d, k);
                }
            }
        }
        used[best.1] = true;
        worst = worst.max(best.0);
    }
    worst
}

/// Rotate `v` so its first significant component (|v_i| > 1e−8·max) is real
/// and positive.
pub fn fix_phase(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    if let Some(first) = v.iter().find(|z| z.norm() > 1e-8 * max) {
        let phase = first.conj() / first.norm();
        for z in v.iter_mut() {
            *z *= phase;
        }
    }
}

pub fn diag(values: impl IntoIterator<Item = Complex64>) -> CMatrix {
    let v: Vec<Complex64> = values.into_iter().collect();
    CMatrix::from_diagonal(&CVector::from_vec(v))
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    diag(values.iter().map(|&x| c(x)))
}

/// Cholesky factor of a Hermitian positive-definite matrix, with the
/// eigenvalue scan used to report indefiniteness.
pub fn cholesky(m: &CMatrix) -> Result<nalgebra::Cholesky<Complex64, nalgebra::Dyn>> {
    // the complex factorisation happily takes square roots of negative pivots
    match hermitian_part(m).cholesky() {
        Some(ch)
            if ch.l_dirty().diagonal().iter().all(|d| d.re > 0.0 && d.re.is_finite() && d.im.abs() <= 1e-12 * d.re) =>
        {
            Ok(ch)
        }
        _ => Err(Error::Indefinite { min_eigenvalue: min_hermitian_eigenvalue(m) }),
    }
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    let lu = m.clone().lu();
    lu.try_inverse().ok_or(Error::Singular { condition: f64::INFINITY })
}
