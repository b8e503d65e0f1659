//! Seeded randomness shared by every experiment.
//!
//! All random objects (probe vectors, Hermitian matrices, invertible
//! transforms) are drawn from a single SplitMix64 stream, so a run is fully
//! determined by its seed. SplitMix64 keeps 64 bits of state and advances it
//! by the golden-ratio increment `0x9E37_79B9_7F4A_7C15`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::SplitMix64;

pub type SeededRng = SplitMix64;

pub fn seeded(seed: u64) -> SeededRng {
    SplitMix64::seed_from_u64(seed)
}

pub fn normal(rng: &mut SeededRng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn complex_normal(rng: &mut SeededRng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng)) / std::f64::consts::SQRT_2
}

pub fn real_vector(rng: &mut SeededRng, n: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| Complex64::new(normal(rng), 0.0))
}

pub fn complex_vector(rng: &mut SeededRng, n: usize) -> DVector<Complex64> {
    DVector::from_fn(n, |_, _| complex_normal(rng))
}

/// Unit-norm complex vector in the plain Euclidean norm.
pub fn unit_vector(rng: &mut SeededRng, n: usize) -> DVector<Complex64> {
    let v = complex_vector(rng, n);
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

pub fn complex_matrix(rng: &mut SeededRng, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| complex_normal(rng))
}

/// Haar-like unitary from the QR factorisation of a complex Gaussian matrix.
pub fn unitary(rng: &mut SeededRng, n: usize) -> DMatrix<Complex64> {
    let qr = complex_matrix(rng, n).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Hermitian matrix `U diag(λ) U*` with |λ| drawn from `[min_abs, max_abs]`
/// and random signs, so it is invertible with a controlled condition number.
pub fn hermitian_invertible(
    rng: &mut SeededRng,
    n: usize,
    min_abs: f64,
    max_abs: f64,
) -> DMatrix<Complex64> {
    let u = unitary(rng, n);
    let lambdas: Vec<f64> = (0..n)
        .map(|_| {
            let mag = rng.random_range(min_abs..=max_abs);
            if rng.random_bool(0.5) { mag } else { -mag }
        })
        .collect();
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        lambdas.iter().map(|&l| Complex64::new(l, 0.0)),
    ));
    let a = &u * d * u.adjoint();
    (&a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

/// General Hermitian matrix from the Gaussian unitary ensemble, scaled so its
/// spectrum is O(1).
pub fn hermitian(rng: &mut SeededRng, n: usize) -> DMatrix<Complex64> {
    let g = complex_matrix(rng, n);
    (&g + g.adjoint()) * Complex64::new(0.5 / (n as f64).sqrt(), 0.0)
}

/// Well-conditioned invertible matrix `I + s·G/√n` with `s < 1`.
pub fn invertible(rng: &mut SeededRng, n: usize, strength: f64) -> DMatrix<Complex64> {
    let g = complex_matrix(rng, n);
    DMatrix::identity(n, n) + g * Complex64::new(strength / (n as f64).sqrt(), 0.0)
}

/// Hermitian positive-definite matrix with eigenvalues in `[lo, hi]`.
pub fn spd(rng: &mut SeededRng, n: usize, lo: f64, hi: f64) -> DMatrix<Complex64> {
    let u = unitary(rng, n);
    let d = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| {
        Complex64::new(rng.random_range(lo..=hi), 0.0)
    }));
    let k = &u * d * u.adjoint();
    (&k + k.adjoint()) * Complex64::new(0.5, 0.0)
}
