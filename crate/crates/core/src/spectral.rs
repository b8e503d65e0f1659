//! Generalized eigenproblems `f(Aφ) = λ f(φ)`, proper bases that turn a
//! Hermitian operator into multiplication by its eigenvalues, and the metric
//! that makes an unbounded operator an isometry.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, SampledFunction, Side};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::linop::LinOp;
use crate::spaces::{CoordinateSpace, Provenance};
use crate::transforms::{hermitian_defect, pushforward_metric, Transform};

/// Eigenvalues closer than this are reported as one cluster.
pub const CLUSTER_GAP: f64 = 1e-10;

/// Accepted Hermitian defect `‖A⁺ − A‖/‖A‖` for a proper basis.
pub const HERMITIAN_TOL: f64 = 1e-8;

/// Eigenvector matrices above this condition number are treated as defective.
const DEFECTIVE_CONDITION: f64 = 1e12;

#[derive(Debug, Clone)]
pub struct GeneralizedEigenpair {
    pub eigenvalue: Complex64,
    /// Dual-side eigenfunctional, unit dual norm, phase fixed.
    pub functional: SampledFunction,
    /// `sup_φ |f(Aφ) − λf(φ)| / ‖φ‖_{L₂}`.
    pub residual: f64,
    /// Index of the eigenvalue cluster; members of one cluster span a
    /// subspace and are individually arbitrary.
    pub cluster: usize,
}

fn check_endomorphism(a: &LinOp, space: &CoordinateSpace) -> Result<()> {
    if !a.is_endomorphism() {
        return Err(Error::InvalidArgument("operator must be an endomorphism".into()));
    }
    space.grid().check_same(a.domain())?;
    if a.from_side() != space.side() {
        return Err(Error::SideMismatch { expected: space.side(), got: a.from_side() });
    }
    Ok(())
}

/// Solves the dual problem `Aᵀu = λu`, `f = W⁻¹u`, so that
/// `pairing(f, Aφ) = λ pairing(f, φ)` for every `φ`. Pairs are sorted by
/// real, then imaginary part.
pub fn generalized_eigs(a: &LinOp, space: &CoordinateSpace) -> Result<Vec<GeneralizedEigenpair>> {
    check_endomorphism(a, space)?;
    let grid = space.grid();
    let at = a.matrix().transpose();
    let (values, vectors) = if linalg::hermitian_deviation(&at) < 1e-13 {
        let (vals, vecs) = linalg::hermitian_eig(&at);
        (vals.into_iter().map(c).collect::<Vec<_>>(), vecs)
    } else {
        let (vals, vecs) = linalg::general_eig(&at)?;
        let condition = linalg::condition_number(&vecs);
        if !(condition <= DEFECTIVE_CONDITION) {
            return Err(Error::Eigensolver(format!(
                "eigenvector matrix has condition {condition:.3e}; operator is defective"
            )));
        }
        (vals, vecs)
    };
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        values[i].re.total_cmp(&values[j].re).then(values[i].im.total_cmp(&values[j].im))
    });
    let w = grid.weights();
    let inv_sqrt_w: Vec<f64> = w.iter().map(|x| 1.0 / x.sqrt()).collect();
    let mut pairs = Vec::with_capacity(n);
    let mut cluster = 0;
    for (pos, &k) in order.iter().enumerate() {
        if pos > 0 && (values[k] - values[order[pos - 1]]).norm() >= CLUSTER_GAP {
            cluster += 1;
        }
        let lambda = values[k];
        let u = vectors.column(k).into_owned();
        let mut f = CVector::from_iterator(n, u.iter().zip(w).map(|(v, wi)| v / wi));
        linalg::fix_phase(&mut f);
        // unit dual norm: Σ w |f|² = 1
        let norm = f.iter().zip(w).map(|(v, wi)| wi * v.norm_sqr()).sum::<f64>().sqrt();
        f /= c(norm);
        let u = CVector::from_iterator(n, f.iter().zip(w).map(|(v, wi)| v * wi));
        let r = &at * &u - &u * lambda;
        let residual = r.iter().zip(&inv_sqrt_w).map(|(v, s)| (v * s).norm_sqr()).sum::<f64>().sqrt();
        pairs.push(GeneralizedEigenpair {
            eigenvalue: lambda,
            functional: SampledFunction::new(grid.clone(), f, Side::Dual)?,
            residual,
            cluster,
        });
    }
    Ok(pairs)
}

/// Distinct eigenvalues, one per cluster, with multiplicities.
pub fn clustered_spectrum(pairs: &[GeneralizedEigenpair]) -> Vec<(Complex64, usize)> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for p in pairs {
        if p.cluster < out.len() {
            out[p.cluster].1 += 1;
        } else {
            out.push((p.eigenvalue, 1));
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct ProperBasisResult {
    /// `κ`, from the space's grid to the index grid of eigenvalue labels.
    pub kappa: Transform,
    /// Sorted eigenvalues as a function on the index grid.
    pub lambda: SampledFunction,
    /// Off-diagonal mass of `κAκ⁻¹`.
    pub residual: f64,
}

impl ProperBasisResult {
    pub fn index_grid(&self) -> &Arc<Grid> {
        self.kappa.codomain()
    }

    /// Eigenvalues as reals.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.lambda.values().iter().map(|v| v.re).collect()
    }

    /// `κ⁻¹`, whose columns are the eigenvectors, orthonormal in the space.
    pub fn basis(&self) -> &LinOp {
        self.kappa.inverse()
    }
}

/// Proper basis of an operator Hermitian in `space`: with `Q = LL*` and
/// `L*AL⁻* = UΛU*`, the eigenvectors are `V = L⁻*U` and `κ = V⁻¹ = U*L*`.
pub fn proper_basis(a: &LinOp, space: &CoordinateSpace) -> Result<ProperBasisResult> {
    check_endomorphism(a, space)?;
    let deviation = hermitian_defect(a, space)?;
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let l = linalg::cholesky(space.form())?.l();
    let lh = l.adjoint();
    let l_inv_h = lh
        .clone()
        .solve_upper_triangular(&CMatrix::identity(l.nrows(), l.nrows()))
        .ok_or(Error::Singular { condition: f64::INFINITY })?;
    let reduced = &lh * a.matrix() * &l_inv_h;
    let (values, mut u) = linalg::hermitian_eig(&reduced);
    for mut col in u.column_iter_mut() {
        let mut v = col.clone_owned();
        linalg::fix_phase(&mut v);
        col.copy_from(&v);
    }
    let n = values.len();
    let index = Grid::index(n)?;
    let kappa_m = u.adjoint() * &lh;
    let kappa = Transform::new(LinOp::new(
        kappa_m,
        space.grid().clone(),
        index.clone(),
        space.side(),
        Side::Primal,
    )?)?;
    let diag = kappa.forward().matrix() * a.matrix() * kappa.inverse().matrix();
    let residual = linalg::off_diagonal_mass(&diag);
    let lambda =
        SampledFunction::new(index, CVector::from_iterator(n, values.into_iter().map(c)), Side::Primal)?;
    Ok(ProperBasisResult { kappa, lambda, residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalityReport {
    pub off_diagonal_mass: f64,
    /// Diagonal `a_k` of the pushed metric.
    pub diagonal: Vec<f64>,
}

/// Metric pushed into the proper basis, `ω*Gω` with `ω = κ⁻¹`.
pub fn verify_proper_basis_orthogonality(
    result: &ProperBasisResult,
    space: &CoordinateSpace,
) -> Result<OrthogonalityReport> {
    let omega = Transform::new(result.basis().clone())?;
    metric_in_basis(&omega, space)
}

/// Off-diagonal mass of `ω*Gω` for any basis transform `ω`.
pub fn metric_in_basis(omega: &Transform, space: &CoordinateSpace) -> Result<OrthogonalityReport> {
    let pushed = pushforward_metric(omega, space)?;
    let form = pushed.form();
    Ok(OrthogonalityReport {
        off_diagonal_mass: linalg::off_diagonal_mass(form),
        diagonal: (0..form.nrows()).map(|k| form[(k, k)].re).collect(),
    })
}

#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// `φ̃ = κφ` on the index grid.
    pub coefficients: SampledFunction,
    /// `c` with `‖κφ‖ ≥ c‖φ‖_{L₂}` for every `φ`.
    pub lower_bound: f64,
    pub condition: f64,
}

pub fn spectral_decomposition(
    phi: &SampledFunction,
    result: &ProperBasisResult,
) -> Result<SpectralDecomposition> {
    let coefficients = result.kappa.forward().apply(phi)?;
    let grid = result.kappa.domain();
    let inv_sqrt_w: Vec<f64> = grid.weights().iter().map(|w| 1.0 / w.sqrt()).collect();
    let k = result.kappa.forward().matrix();
    let scaled = CMatrix::from_fn(k.nrows(), k.ncols(), |i, j| k[(i, j)] * inv_sqrt_w[j]);
    let lower_bound = linalg::singular_values(&scaled).last().copied().unwrap_or(0.0);
    Ok(SpectralDecomposition { coefficients, lower_bound, condition: result.kappa.condition() })
}

/// `(f, g)_H = (A⁻¹f, A⁻¹g)_{L₂}`: the space in which `A` is an isometry
/// from `L₂`.
pub fn metric_from_unbounded(a: &LinOp) -> Result<CoordinateSpace> {
    if !a.is_endomorphism() || a.from_side() != Side::Primal {
        return Err(Error::InvalidArgument("operator must be a primal endomorphism".into()));
    }
    let condition = a.condition_number();
    if !(condition <= crate::spaces::MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let grid = a.domain().clone();
    let inv = linalg::inverse(a.matrix())?;
    let form = inv.adjoint() * grid.weight_matrix() * &inv;
    CoordinateSpace::from_form(grid, Side::Primal, linalg::hermitian_part(&form), Provenance::FromUnbounded)
}

/// Largest `|‖Af‖_H / ‖f‖_{L₂} − 1|` over the given vectors.
pub fn isometry_defect(a: &LinOp, space: &CoordinateSpace, samples: &[SampledFunction]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for f in samples {
        let lhs = space.norm(&a.apply(f)?)?;
        let rhs = crate::grid::l2_norm(f);
        worst = worst.max((lhs / rhs - 1.0).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{derivative_op, multiplication_op, pairing, sample};
    use crate::kernels::Kernel;
    use crate::rng;
    use crate::spaces::{l2_space, space_from_transform};
    use crate::transforms::conjugate_operator;
    use std::f64::consts::PI;

    fn minus_i_d(n: usize) -> (Arc<Grid>, LinOp) {
        let g = Grid::line(0.0, 2.0 * PI, n, true).unwrap();
        let d = derivative_op(&g, 0, 1).unwrap().scaled(Complex64::new(0.0, -1.0));
        (g, d)
    }

    fn random(grid: &Arc<Grid>, r: &mut rng::SeededRng) -> SampledFunction {
        SampledFunction::new(grid.clone(), rng::complex_vector(r, grid.len()), Side::Primal).unwrap()
    }

    #[test]
    fn plane_waves_are_eigenfunctionals_of_momentum() {
        let (g, d) = minus_i_d(64);
        let pairs = generalized_eigs(&d, &l2_space(&g)).unwrap();
        for p in -10i32..=10 {
            let hit = pairs
                .iter()
                .find(|e| (e.eigenvalue - c(p as f64)).norm() < 1e-8)
                .unwrap_or_else(|| panic!("missing eigenvalue {p}"));
            assert!(hit.eigenvalue.im.abs() < 1e-10);
            assert!(hit.residual < 1e-8);
            // with the pairing convention, eigenvalue p belongs to e^{−ipx}
            // compared as subspaces, since p = 0 shares its cluster with the
            // Nyquist mode
            let wave = sample(&g, |x| Complex64::from_polar(1.0, -(p as f64) * x[0])).unwrap();
            let members: Vec<CVector> = pairs
                .iter()
                .filter(|e| e.cluster == hit.cluster)
                .map(|e| e.functional.values().clone())
                .collect();
            let basis = CMatrix::from_columns(&members);
            let coef = basis.clone().svd(true, true).solve(wave.values(), 1e-12).unwrap();
            let err = (&basis * coef - wave.values()).camax();
            assert!(err < 1e-6, "p={p}: {err}");
        }
        // −iD annihilates both the constant and the Nyquist mode
        let spec = clustered_spectrum(&pairs);
        assert!(spec.iter().any(|&(v, m)| v.norm() < 1e-8 && m == 2));
    }

    #[test]
    fn position_has_delta_eigenfunctionals() {
        let g = Grid::line(-1.0, 1.0, 21, false).unwrap();
        let x = multiplication_op(&g, |t| c(t[0])).unwrap();
        let pairs = generalized_eigs(&x, &l2_space(&g)).unwrap();
        for (k, e) in pairs.iter().enumerate() {
            assert_eq!(e.eigenvalue.re, g.node(k)[0]);
            let f = e.functional.values();
            let off: f64 = f.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| v.norm()).sum();
            assert!(off == 0.0 && f[k].re > 0.0);
        }
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let g = Grid::line(0.0, 1.0, 8, false).unwrap();
        let pairs = generalized_eigs(&LinOp::identity(&g, Side::Primal), &l2_space(&g)).unwrap();
        assert!(pairs.iter().all(|e| e.eigenvalue == c(1.0) && e.cluster == 0));
    }

    #[test]
    fn non_normal_operator_and_defective_rejection() {
        let g = Grid::line(0.0, 1.0, 10, false).unwrap();
        let mut r = rng::seeded(11);
        let a = LinOp::endo(rng::complex_matrix(&mut r, 10), g.clone(), Side::Primal).unwrap();
        let pairs = generalized_eigs(&a, &l2_space(&g)).unwrap();
        for e in &pairs {
            assert!(e.residual < 1e-10, "{}", e.residual);
            let phi = random(&g, &mut r);
            let lhs = pairing(&e.functional, &a.apply(&phi).unwrap()).unwrap();
            let rhs = e.eigenvalue * pairing(&e.functional, &phi).unwrap();
            assert!((lhs - rhs).norm() < 1e-9 * (1.0 + lhs.norm()));
        }
        for w in pairs.windows(2) {
            let (a, b) = (w[0].eigenvalue, w[1].eigenvalue);
            assert!(a.re < b.re || (a.re == b.re && a.im <= b.im));
        }
        let mut jordan = CMatrix::zeros(10, 10);
        for i in 0..9 {
            jordan[(i, i + 1)] = c(1.0);
        }
        let j = LinOp::endo(jordan, g.clone(), Side::Primal).unwrap();
        assert!(matches!(generalized_eigs(&j, &l2_space(&g)), Err(Error::Eigensolver(_))));
    }

    #[test]
    fn conjugation_covariance_of_eigenfunctionals() {
        let g = Grid::line(0.0, 1.0, 12, false).unwrap();
        let mut r = rng::seeded(12);
        let a = LinOp::endo(rng::hermitian(&mut r, 12), g.clone(), Side::Primal).unwrap();
        let w = Transform::new(
            LinOp::endo(rng::invertible(&mut r, 12, 0.5), g.clone(), Side::Primal).unwrap(),
        )
        .unwrap();
        let at = conjugate_operator(&w, &a).unwrap();
        let s = l2_space(&g);
        let pa = generalized_eigs(&a, &s).unwrap();
        let pb = generalized_eigs(&at, &s).unwrap();
        for (x, y) in pa.iter().zip(&pb) {
            assert!((x.eigenvalue - y.eigenvalue).norm() < 1e-8);
            let mapped = w.adjoint().apply(&x.functional).unwrap();
            let m = mapped.values();
            let f = y.functional.values();
            let s = (m.adjoint() * f)[(0, 0)] / m.norm_squared();
            assert!((f - m * s).norm() < 1e-8 * f.norm());
        }
    }

    #[test]
    fn proper_basis_of_random_hermitian() {
        let g = Grid::line(0.0, 1.0, 32, true).unwrap();
        let mut r = rng::seeded(13);
        let a = LinOp::endo(rng::hermitian(&mut r, 32), g.clone(), Side::Primal).unwrap();
        let s = l2_space(&g);
        let res = proper_basis(&a, &s).unwrap();
        assert!(res.residual < 1e-10, "{}", res.residual);
        let orth = verify_proper_basis_orthogonality(&res, &s).unwrap();
        assert!(orth.off_diagonal_mass < 1e-10);
        // generalized eigenfunctionals are the dual rows of κ
        let pairs = generalized_eigs(&a, &s).unwrap();
        let k = res.kappa.forward().matrix();
        for (p, e) in pairs.iter().enumerate() {
            let row = CVector::from_iterator(32, (0..32).map(|j| k[(p, j)] / g.weights()[j]));
            let f = e.functional.values();
            let sc = (row.adjoint() * f)[(0, 0)] / row.norm_squared();
            assert!((f - &row * sc).norm() < 1e-8 * f.norm());
        }
    }

    #[test]
    fn diagonal_operator_gets_trivial_basis() {
        let g = Grid::line(0.0, 1.0, 6, true).unwrap();
        let a = LinOp::endo(linalg::real_diag(&[3.0, 1.0, 2.0, 6.0, 5.0, 4.0]), g.clone(), Side::Primal)
            .unwrap();
        let res = proper_basis(&a, &l2_space(&g)).unwrap();
        for (k, v) in res.eigenvalues().iter().enumerate() {
            assert!((v - (k + 1) as f64).abs() < 1e-12);
        }
        // κ is a scaled permutation
        let k = res.kappa.forward().matrix();
        for row in k.row_iter() {
            assert_eq!(row.iter().filter(|v| v.norm() > 1e-12).count(), 1);
        }
    }

    #[test]
    fn momentum_proper_basis_is_fourier() {
        let (g, d) = minus_i_d(32);
        let res = proper_basis(&d, &l2_space(&g)).unwrap();
        assert!(res.residual < 1e-9);
        for v in res.eigenvalues() {
            assert!((v - v.round()).abs() < 1e-8);
        }
        // non-degenerate rows have constant modulus, like e^{−ipx}
        let k = res.kappa.forward().matrix();
        let lam = res.eigenvalues();
        for p in 0..32 {
            let degenerate = lam.iter().filter(|&&l| (l - lam[p]).abs() < 1e-8).count() > 1;
            if degenerate {
                continue;
            }
            let mods: Vec<f64> = k.row(p).iter().map(|v| v.norm()).collect();
            let (lo, hi) = mods.iter().fold((f64::MAX, 0.0f64), |(l, h), &m| (l.min(m), h.max(m)));
            assert!(hi - lo < 1e-10, "row {p}");
        }
    }

    #[test]
    fn proper_basis_in_gaussian_space() {
        let g = Grid::line(-6.0, 6.0, 25, false).unwrap();
        let rho = Kernel::GaussRho.assemble(&g, &g).unwrap();
        let s = space_from_transform(&rho).unwrap();
        // A = G⁻¹BG with B Hermitian in L₂... built as A = Q⁻¹H for Hermitian H
        let mut r = rng::seeded(14);
        let h = rng::hermitian(&mut r, 25);
        let a = LinOp::endo(s.solve_form(&h), g.clone(), Side::Primal).unwrap();
        assert!(hermitian_defect(&a, &s).unwrap() < 1e-8);
        let res = proper_basis(&a, &s).unwrap();
        let orth = verify_proper_basis_orthogonality(&res, &s).unwrap();
        assert!(orth.off_diagonal_mass < 1e-8, "{}", orth.off_diagonal_mass);
        // negative control: a basis that does not diagonalise
        let mix = Transform::new(
            LinOp::endo(rng::invertible(&mut r, 25, 0.8), g.clone(), Side::Primal).unwrap(),
        )
        .unwrap();
        assert!(metric_in_basis(&mix, &s).unwrap().off_diagonal_mass > 1e-2);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let g = Grid::line(0.0, 1.0, 8, true).unwrap();
        let mut r = rng::seeded(15);
        let a = LinOp::endo(rng::complex_matrix(&mut r, 8), g.clone(), Side::Primal).unwrap();
        assert!(matches!(proper_basis(&a, &l2_space(&g)), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn decomposition_laws() {
        let g = Grid::line(-6.0, 6.0, 25, false).unwrap();
        let rho = Kernel::GaussRho.assemble(&g, &g).unwrap();
        let s = space_from_transform(&rho).unwrap();
        let mut r = rng::seeded(16);
        let a = LinOp::endo(s.solve_form(&rng::hermitian(&mut r, 25)), g.clone(), Side::Primal)
            .unwrap();
        let res = proper_basis(&a, &s).unwrap();
        let orth = verify_proper_basis_orthogonality(&res, &s).unwrap();
        let lam = res.eigenvalues();
        // eigenvector → unit spike
        let v = res.basis().matrix().column(3).into_owned();
        let e3 = SampledFunction::new(g.clone(), v, Side::Primal).unwrap();
        let spike = spectral_decomposition(&e3, &res).unwrap().coefficients;
        for (k, x) in spike.values().iter().enumerate() {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert!((x - c(expect)).norm() < 1e-8);
        }
        for _ in 0..10 {
            let phi = random(&g, &mut r);
            let dec = spectral_decomposition(&phi, &res).unwrap();
            let coeff = dec.coefficients.values();
            let parseval: f64 = coeff.iter().zip(&orth.diagonal).map(|(x, a)| a * x.norm_sqr()).sum();
            let norm2 = s.norm(&phi).unwrap().powi(2);
            assert!((parseval - norm2).abs() < 1e-9 * norm2);
            let action = spectral_decomposition(&a.apply(&phi).unwrap(), &res).unwrap();
            for ((x, y), l) in action.coefficients.values().iter().zip(coeff.iter()).zip(&lam) {
                assert!((x - y * *l).norm() < 1e-9 * (1.0 + coeff.norm()));
            }
            assert!(coeff.norm() >= dec.lower_bound * crate::grid::l2_norm(&phi) * (1.0 - 1e-12));
            // F(AΦ) through the proper basis
            let f = SampledFunction::new(g.clone(), rng::complex_vector(&mut r, 25), Side::Dual).unwrap();
            let direct = pairing(&f, &a.apply(&phi).unwrap()).unwrap();
            let ft = res.basis().pairing_adjoint().apply(&f).unwrap();
            let lphi = SampledFunction::new(
                res.index_grid().clone(),
                CVector::from_iterator(25, coeff.iter().zip(&lam).map(|(x, l)| x * *l)),
                Side::Primal,
            )
            .unwrap();
            let via = pairing(&ft, &lphi).unwrap();
            assert!((direct - via).norm() < 1e-9 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn unbounded_operator_becomes_isometry() {
        let g = Grid::line(0.0, 1.0, 10, false).unwrap();
        let id = LinOp::identity(&g, Side::Primal);
        let s = metric_from_unbounded(&id).unwrap();
        assert!((s.form() - g.weight_matrix()).camax() < 1e-15);

        let mut r = rng::seeded(17);
        let samples = |g: &Arc<Grid>, r: &mut rng::SeededRng| -> Vec<SampledFunction> {
            (0..20).map(|_| random(g, r)).collect()
        };
        let (pg, d) = minus_i_d(32);
        let shifted = d.scaled(Complex64::new(0.0, 1.0)).add(&LinOp::identity(&pg, Side::Primal)).unwrap();
        let s = metric_from_unbounded(&shifted).unwrap();
        assert!(isometry_defect(&shifted, &s, &samples(&pg, &mut r)).unwrap() < 1e-9);

        let grow: Vec<f64> = (1..=32).map(|k| k as f64).collect();
        let diag = LinOp::endo(linalg::real_diag(&grow), pg.clone(), Side::Primal).unwrap();
        let s = metric_from_unbounded(&diag).unwrap();
        assert!(isometry_defect(&diag, &s, &samples(&pg, &mut r)).unwrap() < 1e-10);
    }
}
