//! Coordinate Hilbert spaces on a grid.
//!
//! A space is a Hermitian positive-definite form `Q` on vectors of one side,
//! `inner(f, g) = f* Q g`. The metric operator `G = W⁻¹Q` carries vectors to
//! the opposite side so that `pairing(conj(Gφ), ψ) = inner(φ, ψ)`, and the
//! dual space carries the form `W Q⁻¹ W`.

use std::sync::Arc;

use nalgebra::{Cholesky, Dyn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{derivative_op, Grid, SampledFunction, Side};
use crate::kernels::Kernel;
use crate::linalg::{self, CMatrix, CVector};
use crate::linop::LinOp;

/// Relative Hermitian deviation tolerated before a form is rejected.
const HERMITIAN_TOL: f64 = 1e-10;

/// Transforms with a larger condition number do not induce a usable space.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    L2,
    FromTransform,
    FromKernel(String),
    FromUnbounded,
    Pushforward(Box<Provenance>),
    DualOf(Box<Provenance>),
}

#[derive(Debug, Clone)]
pub struct CoordinateSpace {
    grid: Arc<Grid>,
    side: Side,
    form: CMatrix,
    factor: Cholesky<Complex64, Dyn>,
    provenance: Provenance,
}

impl CoordinateSpace {
    /// Builds a space from its form matrix after a Hermitian check and an
    /// eigenvalue scan for positive-definiteness.
    pub fn from_form(
        grid: Arc<Grid>,
        side: Side,
        form: CMatrix,
        provenance: Provenance,
    ) -> Result<Self> {
        let n = grid.len();
        if form.nrows() != n || form.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} form on a grid of {} nodes",
                form.nrows(),
                form.ncols(),
                n
            )));
        }
        let deviation = linalg::hermitian_deviation(&form);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let form = linalg::hermitian_part(&form);
        let min_eigenvalue = linalg::min_hermitian_eigenvalue(&form);
        if min_eigenvalue <= 0.0 {
            return Err(Error::Indefinite { min_eigenvalue });
        }
        let factor = linalg::cholesky(&form)?;
        Ok(CoordinateSpace { grid, side, form, factor, provenance })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Side of the vectors this space measures.
    pub fn side(&self) -> Side {
        self.side
    }

    pub fn form(&self) -> &CMatrix {
        &self.form
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `G = W⁻¹Q`, from this space's side to the opposite one.
    pub fn metric(&self) -> LinOp {
        let m = self.grid.inverse_weight_matrix() * &self.form;
        LinOp::new(m, self.grid.clone(), self.grid.clone(), self.side, self.side.flip())
            .expect("square on its own grid")
    }

    /// `G⁻¹ = Q⁻¹W`, the metric operator of the dual space.
    pub fn inverse_metric(&self) -> LinOp {
        let m = self.factor.solve(&self.grid.weight_matrix());
        LinOp::new(m, self.grid.clone(), self.grid.clone(), self.side.flip(), self.side)
            .expect("square on its own grid")
    }

    /// `Q⁻¹ · rhs` with the cached factorization.
    pub fn solve_form(&self, rhs: &CMatrix) -> CMatrix {
        self.factor.solve(rhs)
    }

    fn check(&self, f: &SampledFunction) -> Result<()> {
        self.grid.check_same(f.grid())?;
        if f.side() != self.side {
            return Err(Error::SideMismatch { expected: self.side, got: f.side() });
        }
        Ok(())
    }

    /// Conjugate-linear in the first slot.
    pub fn inner(&self, f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
        self.check(f)?;
        self.check(g)?;
        Ok(self.form_value(f.values(), g.values()))
    }

    pub(crate) fn form_value(&self, f: &CVector, g: &CVector) -> Complex64 {
        (f.adjoint() * (&self.form * g))[(0, 0)]
    }

    pub fn norm(&self, f: &SampledFunction) -> Result<f64> {
        Ok(self.inner(f, f)?.re.max(0.0).sqrt())
    }

    pub fn riesz(&self, phi: &SampledFunction) -> Result<SampledFunction> {
        self.metric().apply(phi)
    }

    pub fn riesz_inv(&self, f: &SampledFunction) -> Result<SampledFunction> {
        self.grid.check_same(f.grid())?;
        if f.side() != self.side.flip() {
            return Err(Error::SideMismatch { expected: self.side.flip(), got: f.side() });
        }
        let w = self.grid.weights();
        let rhs = CVector::from_iterator(w.len(), f.values().iter().zip(w).map(|(v, &wi)| v * wi));
        SampledFunction::new(self.grid.clone(), self.factor.solve(&rhs), self.side)
    }

    /// The space of opposite-side vectors with form `W Q⁻¹ W`.
    pub fn dual(&self) -> Result<CoordinateSpace> {
        let w = self.grid.weight_matrix();
        let form = &w * self.factor.solve(&w);
        let provenance = match &self.provenance {
            Provenance::DualOf(inner) => (**inner).clone(),
            Provenance::L2 => Provenance::L2,
            other => Provenance::DualOf(Box::new(other.clone())),
        };
        CoordinateSpace::from_form(
            self.grid.clone(),
            self.side.flip(),
            linalg::hermitian_part(&form),
            provenance,
        )
    }
}

pub fn l2_space(grid: &Arc<Grid>) -> CoordinateSpace {
    CoordinateSpace::from_form(grid.clone(), Side::Primal, grid.weight_matrix(), Provenance::L2)
        .expect("positive weights give a positive form")
}

fn check_transform(rho: &LinOp) -> Result<()> {
    if !rho.is_endomorphism() || rho.from_side() != Side::Primal {
        return Err(Error::InvalidArgument(
            "a metric-inducing transform must be a primal endomorphism of one grid".into(),
        ));
    }
    Ok(())
}

/// The image space `H = ρ(L₂)` with `(φ, ψ)_H = (ρ⁻¹φ, ρ⁻¹ψ)_{L₂}`.
pub fn space_from_transform(rho: &LinOp) -> Result<CoordinateSpace> {
    check_transform(rho)?;
    let condition = rho.condition_number();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular { condition });
    }
    let grid = rho.domain().clone();
    let r_inv = linalg::inverse(rho.matrix())?;
    let form = r_inv.adjoint() * grid.weight_matrix() * &r_inv;
    CoordinateSpace::from_form(grid, Side::Primal, form, Provenance::FromTransform)
}

/// The dual of [`space_from_transform`], built without inverting `ρ`: its
/// form is `W R W⁻¹ R* W`, so the dual metric operator is `ρρ*`.
pub fn dual_space_from_transform(rho: &LinOp) -> Result<CoordinateSpace> {
    check_transform(rho)?;
    let grid = rho.domain().clone();
    let w = grid.weight_matrix();
    let r = rho.matrix();
    let form = &w * r * grid.inverse_weight_matrix() * r.adjoint() * &w;
    CoordinateSpace::from_form(
        grid,
        Side::Dual,
        form,
        Provenance::DualOf(Box::new(Provenance::FromTransform)),
    )
}

/// `ρρ*` as an operator from dual to primal vectors.
pub fn dual_metric_of_transform(rho: &LinOp) -> Result<LinOp> {
    check_transform(rho)?;
    rho.compose(&rho.hermitian_adjoint().with_sides(Side::Dual, Side::Primal))
}

/// The space whose form on `side` is `∫∫ k(x,y) conj f(x) g(y) dx dy`.
pub fn space_from_kernel(kernel: &Kernel, grid: &Arc<Grid>, side: Side) -> Result<CoordinateSpace> {
    let assembled = kernel.assemble(grid, grid)?;
    let form = grid.weight_matrix() * assembled.matrix();
    CoordinateSpace::from_form(
        grid.clone(),
        side,
        form,
        Provenance::FromKernel(kernel.name().to_string()),
    )
}

/// Suprema `sup_x |x^k φ^(q)(x)|` for `φ = ρf`, `ρ` the damped Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMetricReport {
    /// `‖ρρ* − cM‖_F / ‖ρρ*‖_F` with the integration variable on the padded grid.
    pub deviation: f64,
    /// The best scalar `c`.
    pub scalar: Complex64,
    /// Same deviation when `ρ` is restricted to the target grid itself.
    pub truncated_deviation: f64,
}

/// Compares `ρρ*` with the assembled `metric` kernel on a one-dimensional
/// non-periodic `grid`, up to one scalar. The inner integration variable runs
/// over `grid` widened by `pad` on both sides at the same spacing, so the
/// product approximates the integral over the whole line.
pub fn dual_metric_identity(
    rho: &Kernel,
    metric: &Kernel,
    grid: &Arc<Grid>,
    pad: f64,
) -> Result<DualMetricReport> {
    if grid.dim() != 1 || grid.is_periodic() {
        return Err(Error::InvalidGrid("dual-metric check needs a non-periodic line".into()));
    }
    let axis = &grid.axes()[0];
    let h = axis.spacing();
    let extra = (pad / h).round() as usize;
    let wide = Grid::line(
        axis.lo - extra as f64 * h,
        axis.hi + extra as f64 * h,
        axis.points + 2 * extra,
        false,
    )?;
    let target = metric.assemble(grid, grid)?;
    let compare = |inner: &Arc<Grid>| -> Result<(f64, Complex64)> {
        let r = rho.assemble(inner, grid)?;
        let rr = r.compose(&r.hermitian_adjoint().with_sides(Side::Primal, Side::Primal))?;
        let scalar = linalg::best_scalar(rr.matrix(), target.matrix());
        let scaled = target.matrix() * scalar;
        Ok((linalg::relative_deviation(rr.matrix(), &scaled), scalar))
    };
    let (deviation, scalar) = compare(&wide)?;
    let (truncated_deviation, _) = compare(grid)?;
    Ok(DualMetricReport { deviation, scalar, truncated_deviation })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub p: usize,
    /// Indexed `[k][q]`.
    pub sup: Vec<Vec<f64>>,
}

impl DecayReport {
    pub fn max(&self) -> f64 {
        self.sup.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.sup.iter().flatten().all(|v| v.is_finite())
    }
}

pub fn schwartz_decay_report(f: &SampledFunction, p: usize) -> Result<DecayReport> {
    if p > 3 {
        return Err(Error::InvalidArgument(format!("decay order {p} exceeds 3")));
    }
    let grid = f.grid();
    if grid.dim() != 1 {
        return Err(Error::DimensionMismatch("decay report is one-dimensional".into()));
    }
    let rho = Kernel::DampedGauss.assemble(grid, grid)?;
    let phi = rho.apply(&f.clone().with_side(Side::Primal))?;
    let d = derivative_op(grid, 0, 1)?;
    let mut derivs = vec![phi.values().clone()];
    for q in 1..=p {
        derivs.push(d.matrix() * &derivs[q - 1]);
    }
    let xs: Vec<f64> = grid.nodes().map(|x| x[0]).collect();
    let sup = (0..=p)
        .map(|k| {
            derivs
                .iter()
                .map(|d| {
                    d.iter()
                        .zip(&xs)
                        .map(|(v, x)| x.abs().powi(k as i32) * v.norm())
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    Ok(DecayReport { p, sup })
}
