//! Linear coordinate transformations: transformation laws for vectors,
//! metrics, operators and (1,2)-tensors, Hermitian conjugates, and the
//! construction and verification of locality-preserving kernels.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{derivative_op, multiplication_op, sample_real, Grid, SampledFunction, Side};
use crate::kernels::{CustomKernel, Kernel};
use crate::linalg::{self, c, CMatrix};
use crate::linop::LinOp;
use crate::spaces::{CoordinateSpace, Provenance, MAX_CONDITION};

/// Accepted `‖ΩΩ⁻¹ − I‖` for a transform.
const INVERSE_TOL: f64 = 1e-8;

/// An invertible operator with its inverse and pairing adjoint cached.
#[derive(Debug, Clone)]
pub struct Transform {
    forward: LinOp,
    inverse: LinOp,
    adjoint: LinOp,
    condition: f64,
}

impl Transform {
    pub fn new(forward: LinOp) -> Result<Self> {
        let m = forward.matrix();
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "a transform needs a square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let condition = linalg::condition_number(m);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::Singular { condition });
        }
        let inv = linalg::inverse(m)?;
        let n = m.nrows();
        let defect = linalg::operator_norm_estimate(&(m * &inv - CMatrix::identity(n, n)), 20);
        if defect > INVERSE_TOL {
            return Err(Error::Singular { condition });
        }
        let inverse = LinOp::new(
            inv,
            forward.codomain().clone(),
            forward.domain().clone(),
            forward.to_side(),
            forward.from_side(),
        )?;
        let adjoint = forward.pairing_adjoint();
        Ok(Transform { forward, inverse, adjoint, condition })
    }

    pub fn identity(grid: &Arc<Grid>) -> Self {
        Transform::new(LinOp::identity(grid, Side::Primal)).expect("identity is invertible")
    }

    pub fn forward(&self) -> &LinOp {
        &self.forward
    }

    pub fn inverse(&self) -> &LinOp {
        &self.inverse
    }

    /// `ω*` with `pairing(ω*f, φ) = pairing(f, ωφ)`.
    pub fn adjoint(&self) -> &LinOp {
        &self.adjoint
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn domain(&self) -> &Arc<Grid> {
        self.forward.domain()
    }

    pub fn codomain(&self) -> &Arc<Grid> {
        self.forward.codomain()
    }
}

/// `φ = ωφ̃`.
pub fn pushforward_vector(omega: &Transform, phi: &SampledFunction) -> Result<SampledFunction> {
    omega.forward.apply(phi)
}

/// The metric `ω*Gω` on ω's domain: `inner(φ̃, ψ̃) = inner_G(ωφ̃, ωψ̃)`.
pub fn pushforward_metric(omega: &Transform, space: &CoordinateSpace) -> Result<CoordinateSpace> {
    omega.codomain().check_same(space.grid())?;
    if space.side() != omega.forward.to_side() {
        return Err(Error::SideMismatch { expected: omega.forward.to_side(), got: space.side() });
    }
    let m = omega.forward.matrix();
    let form = m.adjoint() * space.form() * m;
    CoordinateSpace::from_form(
        omega.domain().clone(),
        omega.forward.from_side(),
        linalg::hermitian_part(&form),
        Provenance::Pushforward(Box::new(space.provenance().clone())),
    )
}

/// `Ã = ω⁻¹Aω`.
pub fn conjugate_operator(omega: &Transform, a: &LinOp) -> Result<LinOp> {
    omega.inverse.compose(&a.compose(&omega.forward)?)
}

/// `A⁺ = G⁻¹A*G`, so that `inner(A⁺φ, ψ) = inner(φ, Aψ)`.
pub fn hermitian_conjugate(a: &LinOp, space: &CoordinateSpace) -> Result<LinOp> {
    if !a.is_endomorphism() {
        return Err(Error::InvalidArgument("Hermitian conjugate needs an endomorphism".into()));
    }
    space.grid().check_same(a.domain())?;
    if a.from_side() != space.side() {
        return Err(Error::SideMismatch { expected: space.side(), got: a.from_side() });
    }
    let m = space.solve_form(&(a.matrix().adjoint() * space.form()));
    LinOp::endo(m, space.grid().clone(), space.side())
}

/// Deviation `‖A⁺ − A‖_F / ‖A‖_F` in the given space.
pub fn hermitian_defect(a: &LinOp, space: &CoordinateSpace) -> Result<f64> {
    let plus = hermitian_conjugate(a, space)?;
    let scale = a.matrix().norm().max(f64::MIN_POSITIVE);
    Ok((plus.matrix() - a.matrix()).norm() / scale)
}

/// Fourier transform between a periodic grid on `[0, 2π)` and the integer
/// frequency grid `−n/2 … n/2 − 1`: `σ(k,x) = e^{ikx}`, `ω = σ⁻¹` with kernel
/// `e^{−ikx}/2π`.
#[derive(Debug, Clone)]
pub struct FourierPair {
    pub sigma: Transform,
    pub omega: Transform,
}

impl FourierPair {
    pub fn new(n: usize) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("Fourier pair needs an even n >= 4, got {n}")));
        }
        let x = Grid::line(0.0, 2.0 * PI, n, true)?;
        let half = (n / 2) as f64;
        let k = Grid::line(-half, half, n, true)?;
        let sigma = Kernel::Fourier.assemble(&x, &k)?;
        let inv = CMatrix::from_fn(n, n, |i, j| {
            let xi = x.node(i)[0];
            let kj = k.node(j)[0];
            Complex64::from_polar(1.0 / (2.0 * PI), -kj * xi) * k.weights()[j]
        });
        let omega = LinOp::new(inv, k.clone(), x.clone(), Side::Primal, Side::Primal)?;
        Ok(FourierPair { sigma: Transform::new(sigma)?, omega: Transform::new(omega)? })
    }

    pub fn x_grid(&self) -> &Arc<Grid> {
        self.sigma.domain()
    }

    pub fn k_grid(&self) -> &Arc<Grid> {
        self.sigma.codomain()
    }
}

/// A kernel solving a first-order locality relation, with the data that
/// decides whether it is also a coordinate transformation.
#[derive(Debug, Clone)]
pub struct FirstOrderSolution {
    pub kernel: Kernel,
    pub omega: LinOp,
    /// Relative Frobenius residual of the defining relation on the grid.
    pub residual: f64,
    pub rank: usize,
    pub condition: f64,
}

impl FirstOrderSolution {
    pub fn is_isomorphism(&self) -> bool {
        self.rank == self.omega.matrix().nrows() && self.condition <= MAX_CONDITION
    }

    pub fn into_transform(self) -> Result<Transform> {
        if !self.is_isomorphism() {
            return Err(Error::Singular { condition: self.condition });
        }
        Transform::new(self.omega)
    }

    fn finish(kernel: Kernel, omega: LinOp, residual: f64) -> Self {
        let rank = linalg::numerical_rank(omega.matrix(), 1e-12);
        let condition = omega.condition_number();
        FirstOrderSolution { kernel, omega, residual, rank, condition }
    }
}

/// `∫_lo^x dt/a(t)` at each node, cumulative trapezoid refined by `SUB`
/// sub-intervals per grid cell.
fn antiderivative_of_reciprocal(grid: &Arc<Grid>, a: &dyn Fn(f64) -> f64) -> Result<Vec<f64>> {
    const SUB: usize = 16;
    let xs: Vec<f64> = grid.nodes().map(|x| x[0]).collect();
    let sign0 = a(xs[0]).signum();
    let check = |x: f64| -> Result<f64> {
        let v = a(x);
        if !v.is_finite() || v == 0.0 || v.signum() != sign0 {
            return Err(Error::InvalidArgument(format!("coefficient a vanishes near x = {x}")));
        }
        Ok(1.0 / v)
    };
    let mut out = vec![0.0; xs.len()];
    let mut prev = check(xs[0])?;
    for i in 1..xs.len() {
        let h = (xs[i] - xs[i - 1]) / SUB as f64;
        let mut acc = 0.0;
        for s in 1..=SUB {
            let cur = check(xs[i - 1] + h * s as f64)?;
            acc += 0.5 * h * (prev + cur);
            prev = cur;
        }
        out[i] = out[i - 1] + acc;
    }
    Ok(out)
}

/// Table lookup with linear interpolation; exact at the nodes.
fn tabulated(xs: Vec<f64>, ys: Vec<f64>) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    move |x: f64| {
        let n = xs.len();
        let j = xs.partition_point(|&t| t < x).clamp(1, n - 1);
        let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
        ys[j - 1] * (1.0 - t) + ys[j] * t
    }
}

fn require_line(grid: &Arc<Grid>) -> Result<()> {
    if grid.dim() != 1 || grid.is_periodic() {
        return Err(Error::InvalidGrid("first-order transforms need a non-periodic line".into()));
    }
    Ok(())
}

/// Real or complex coefficient function of one variable.
pub type Coefficient = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// `ω(x,y) = g(y) e^{c(x) b(y)}` with `c = ∫dx/a`, which satisfies
/// `a ∂ω/∂x = ω b`. The residual is `‖(aD)Ω − Ω·b‖_F / ‖Ω‖_F`.
pub fn solve_first_order_transform(
    grid: &Arc<Grid>,
    a: &dyn Fn(f64) -> f64,
    b: Coefficient,
    g: Coefficient,
) -> Result<FirstOrderSolution> {
    require_line(grid)?;
    let xs: Vec<f64> = grid.nodes().map(|x| x[0]).collect();
    let cx = tabulated(xs, antiderivative_of_reciprocal(grid, a)?);
    let bk = b.clone();
    let kernel = Kernel::Custom(CustomKernel::new("first_order", move |x: &[f64], y: &[f64]| {
        g(y[0]) * (bk(y[0]) * cx(x[0])).exp()
    }));
    let omega = kernel.assemble(grid, grid)?;
    let residual = first_order_residual(&omega, a, &*b)?;
    Ok(FirstOrderSolution::finish(kernel, omega, residual))
}

/// `‖(aD)Ω − Ω·b‖_F / ‖Ω‖_F` for any assembled kernel on a line.
pub fn first_order_residual(
    omega: &LinOp,
    a: &dyn Fn(f64) -> f64,
    b: &dyn Fn(f64) -> Complex64,
) -> Result<f64> {
    let grid = omega.domain();
    let a_d = multiplication_op(grid, |x| c(a(x[0])))?.compose(&derivative_op(grid, 0, 1)?)?;
    let lhs = a_d.compose(omega)?;
    let rhs = omega.compose(&multiplication_op(grid, |y| b(y[0]))?)?;
    Ok((lhs.matrix() - rhs.matrix()).norm() / omega.matrix().norm())
}

/// The separable solution `ω(x,y) = exp(C e^{C₁c(x)} e^{−C₁y})`, `c = ∫dx/a`,
/// which intertwines `aD` with `D`: `a ∂ω/∂x = −∂ω/∂y`. For `a = x` on an
/// interval starting at 1 this is `e^{x e^{−y}}`. The residual is the
/// kernel-level `‖a∂_xω + ∂_yω‖_F / ‖a∂_xω‖_F`.
pub fn separable_intertwiner(
    grid: &Arc<Grid>,
    a: &dyn Fn(f64) -> f64,
    amplitude: f64,
    rate: f64,
) -> Result<FirstOrderSolution> {
    require_line(grid)?;
    let xs: Vec<f64> = grid.nodes().map(|x| x[0]).collect();
    let cx = tabulated(xs, antiderivative_of_reciprocal(grid, a)?);
    let kernel = Kernel::Custom(CustomKernel::new("separable", move |x: &[f64], y: &[f64]| {
        c((amplitude * (rate * cx(x[0])).exp() * (-rate * y[0]).exp()).exp())
    }));
    let omega = kernel.assemble(grid, grid)?;
    let k = kernel.point_matrix(grid)?;
    let d = derivative_op(grid, 0, 1)?;
    let ad = multiplication_op(grid, |x| c(a(x[0])))?.matrix() * d.matrix() * &k;
    let dy = &k * d.matrix().transpose();
    let residual = (&ad + dy).norm() / ad.norm();
    Ok(FirstOrderSolution::finish(kernel, omega, residual))
}

/// `max_φ ‖L Ω φ − Ω R φ‖ / ‖Ω R φ‖` over a bank of test functions: the
/// inversion-free form of `Ω⁻¹LΩ = R`.
pub fn intertwining_residual(
    left: &LinOp,
    omega: &LinOp,
    right: &LinOp,
    bank: &[SampledFunction],
) -> Result<f64> {
    intertwining_power_residual(left, omega, right, 1, bank)
}

/// As [`intertwining_residual`] for `Lᵖ` and `Rᵖ`, applied factor by factor.
pub fn intertwining_power_residual(
    left: &LinOp,
    omega: &LinOp,
    right: &LinOp,
    power: usize,
    bank: &[SampledFunction],
) -> Result<f64> {
    let repeat = |op: &LinOp, f: SampledFunction| -> Result<SampledFunction> {
        (0..power).try_fold(f, |acc, _| op.apply(&acc))
    };
    let mut worst: f64 = 0.0;
    for phi in bank {
        let lhs = repeat(left, omega.apply(phi)?)?;
        let rhs = omega.apply(&repeat(right, phi.clone())?)?;
        let scale = rhs.values().norm();
        if scale == 0.0 {
            continue;
        }
        worst = worst.max((lhs.values() - rhs.values()).norm() / scale);
    }
    Ok(worst)
}

/// Ten Gaussian-windowed harmonics centred on the interval, negligible at
/// both ends.
pub fn band_limited_bank(grid: &Arc<Grid>) -> Result<Vec<SampledFunction>> {
    let ax = grid.axes()[0];
    let mid = 0.5 * (ax.lo + ax.hi);
    let s = ax.length() / 16.0;
    let mut bank = Vec::with_capacity(10);
    for j in 0..5 {
        let freq = 0.5 * j as f64 / s;
        bank.push(sample_real(grid, |x| {
            let u = (x[0] - mid) / s;
            (-0.5 * u * u).exp() * (freq * (x[0] - mid)).cos()
        })?);
        bank.push(sample_real(grid, |x| {
            let u = (x[0] - mid) / s;
            (-0.5 * u * u).exp() * (freq * (x[0] - mid) + 0.5).sin()
        })?);
    }
    Ok(bank)
}

/// `sin(jπ(x−lo)/L)·((x−lo)(hi−x)/L²)⁴` for `j = 1..=count`: zero to fourth
/// order at both ends, so boundary terms and trapezoid end corrections drop
/// out of integration by parts.
pub fn boundary_vanishing_bank(grid: &Arc<Grid>, count: usize) -> Result<Vec<SampledFunction>> {
    let ax = grid.axes()[0];
    let l = ax.length();
    (1..=count)
        .map(|j| {
            sample_real(grid, |x| {
                let t = x[0] - ax.lo;
                (j as f64 * PI * t / l).sin() * (t * (ax.hi - x[0]) / (l * l)).powi(4)
            })
        })
        .collect()
}

/// Translation kernel `ω(x,y) = f(x−y)`.
pub fn translation_kernel(
    name: &str,
    f: impl Fn(f64) -> f64 + Send + Sync + 'static,
) -> Kernel {
    Kernel::Custom(
        CustomKernel::new(name, move |x: &[f64], y: &[f64]| c(f(x[0] - y[0]))).smooth(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreservationReport {
    /// `DΩ` against `ΩD` on the band-limited bank.
    pub residual_d: f64,
    /// `D²Ω` against `ΩD²`.
    pub residual_d2: f64,
    /// `residual_d` on the grid with doubled resolution.
    pub refined_d: f64,
    pub condition: f64,
}

impl PreservationReport {
    pub fn refines(&self) -> bool {
        self.refined_d <= self.residual_d
    }
}

/// Whether the kernel preserves `D` (and `D²`) on `[lo, hi]`.
pub fn verify_derivative_preservation(
    kernel: &Kernel,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<PreservationReport> {
    let run = |n: usize| -> Result<(f64, f64, LinOp)> {
        let grid = Grid::line(lo, hi, n, false)?;
        let omega = kernel.assemble(&grid, &grid)?;
        let d = derivative_op(&grid, 0, 1)?;
        let bank = band_limited_bank(&grid)?;
        let r1 = intertwining_residual(&d, &omega, &d, &bank)?;
        let r2 = intertwining_power_residual(&d, &omega, &d, 2, &bank)?;
        Ok((r1, r2, omega))
    };
    let (residual_d, residual_d2, omega) = run(points)?;
    let condition = omega.condition_number();
    let (refined_d, _, _) = run(2 * points - 1)?;
    Ok(PreservationReport { residual_d, residual_d2, refined_d, condition })
}

/// `max_φ ‖a·Ωφ − Ω(aφ)‖ / ‖Ω(aφ)‖`: zero iff multiplication by `a` is
/// preserved by `Ω` on the bank.
pub fn product_noninvariance(
    omega: &LinOp,
    a: &dyn Fn(f64) -> f64,
    bank: &[SampledFunction],
) -> Result<f64> {
    let m = multiplication_op(omega.domain(), |x| c(a(x[0])))?;
    intertwining_residual(&m, omega, &m, bank)
}

/// Product non-invariance for the Gaussian smoothing kernel on `[−8, 8]`.
pub fn product_noninvariance_demo(a: &dyn Fn(f64) -> f64) -> Result<f64> {
    let grid = Grid::line(-8.0, 8.0, 257, false)?;
    let omega = Kernel::GaussRho.assemble(&grid, &grid)?;
    product_noninvariance(&omega, a, &band_limited_bank(&grid)?)
}

/// A (1,2)-tensor on a grid, `c(φ,ψ)_x = Σ_uv C[x][u,v] φ_u ψ_v` with
/// quadrature weights folded into the coefficients.
#[derive(Debug, Clone)]
pub struct Tensor12 {
    grid: Arc<Grid>,
    slices: Vec<CMatrix>,
}

/// Largest grid for which dense (1,2)-tensors are built.
pub const MAX_TENSOR_NODES: usize = 64;

impl Tensor12 {
    pub fn new(grid: Arc<Grid>, slices: Vec<CMatrix>) -> Result<Self> {
        let n = grid.len();
        if n > MAX_TENSOR_NODES {
            return Err(Error::InvalidGrid(format!(
                "(1,2)-tensors are limited to {MAX_TENSOR_NODES} nodes, got {n}"
            )));
        }
        if slices.len() != n || slices.iter().any(|s| s.nrows() != n || s.ncols() != n) {
            return Err(Error::DimensionMismatch("tensor slices do not match the grid".into()));
        }
        Ok(Tensor12 { grid, slices })
    }

    /// `c^x_{uv} = δ(x−u)δ(x−v)`, so that `c(φ,φ) = φ²`.
    pub fn delta_delta(grid: &Arc<Grid>) -> Result<Self> {
        let n = grid.len();
        let slices = (0..n)
            .map(|x| {
                let mut m = CMatrix::zeros(n, n);
                m[(x, x)] = c(1.0);
                m
            })
            .collect();
        Tensor12::new(grid.clone(), slices)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn slices(&self) -> &[CMatrix] {
        &self.slices
    }

    pub fn apply(&self, phi: &SampledFunction, psi: &SampledFunction) -> Result<SampledFunction> {
        for f in [phi, psi] {
            self.grid.check_same(f.grid())?;
            if f.side() != Side::Primal {
                return Err(Error::SideMismatch { expected: Side::Primal, got: f.side() });
            }
        }
        let values = self
            .slices
            .iter()
            .map(|s| (phi.values().transpose() * s * psi.values())[(0, 0)]);
        SampledFunction::new(
            self.grid.clone(),
            crate::linalg::CVector::from_iterator(self.slices.len(), values),
            Side::Primal,
        )
    }
}

/// `c̃^x_{uv} = (ω⁻¹)^x_z c^z_{ab} ω^a_u ω^b_v`.
pub fn pushforward_12tensor(omega: &Transform, tensor: &Tensor12) -> Result<Tensor12> {
    omega.codomain().check_same(tensor.grid())?;
    let w = omega.forward.matrix();
    let inv = omega.inverse.matrix();
    let n = omega.domain().len();
    let pulled: Vec<CMatrix> = tensor.slices.iter().map(|s| w.transpose() * s * w).collect();
    let slices = (0..n)
        .map(|x| {
            let mut acc = CMatrix::zeros(n, n);
            for (z, p) in pulled.iter().enumerate() {
                acc += p * inv[(x, z)];
            }
            acc
        })
        .collect();
    Tensor12::new(omega.domain().clone(), slices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{pairing, sample};
    use crate::linalg::spectrum_distance;
    use crate::rng;
    use crate::spaces::l2_space;

    fn random_transform(grid: &Arc<Grid>, r: &mut rng::SeededRng) -> Transform {
        let m = rng::invertible(r, grid.len(), 0.5);
        Transform::new(LinOp::endo(m, grid.clone(), Side::Primal).unwrap()).unwrap()
    }

    fn random(grid: &Arc<Grid>, r: &mut rng::SeededRng, side: Side) -> SampledFunction {
        SampledFunction::new(grid.clone(), rng::complex_vector(r, grid.len()), side).unwrap()
    }

    #[test]
    fn identity_laws() {
        let g = Grid::line(-1.0, 1.0, 9, false).unwrap();
        let id = Transform::identity(&g);
        let mut r = rng::seeded(1);
        let phi = random(&g, &mut r, Side::Primal);
        assert_eq!(pushforward_vector(&id, &phi).unwrap().values(), phi.values());
        let s = l2_space(&g);
        let p = pushforward_metric(&id, &s).unwrap();
        assert!((p.form() - s.form()).camax() < 1e-15);
        let a = LinOp::endo(rng::complex_matrix(&mut r, 9), g.clone(), Side::Primal).unwrap();
        assert!((conjugate_operator(&id, &a).unwrap().matrix() - a.matrix()).camax() < 1e-14);
        let dd = Tensor12::delta_delta(&g).unwrap();
        let pushed = pushforward_12tensor(&id, &dd).unwrap();
        for (x, y) in pushed.slices().iter().zip(dd.slices()) {
            assert!((x - y).camax() < 1e-15);
        }
    }

    #[test]
    fn round_trip_and_adjoint_contract() {
        let g = Grid::line(-2.0, 3.0, 16, false).unwrap();
        let mut r = rng::seeded(2);
        let w = random_transform(&g, &mut r);
        for _ in 0..100 {
            let phi = random(&g, &mut r, Side::Primal);
            let f = random(&g, &mut r, Side::Dual);
            let back = w.inverse().apply(&w.forward().apply(&phi).unwrap()).unwrap();
            assert!((back.values() - phi.values()).norm() < 1e-8 * phi.values().norm());
            let lhs = pairing(&w.adjoint().apply(&f).unwrap(), &phi).unwrap();
            let rhs = pairing(&f, &w.forward().apply(&phi).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
            // F(Φ) = f(φ) in both coordinates
            let tilde = w.inverse().apply(&phi).unwrap();
            let s = pairing(&w.adjoint().apply(&f).unwrap(), &tilde).unwrap();
            assert!((s - pairing(&f, &phi).unwrap()).norm() < 1e-10 * (1.0 + s.norm()));
        }
    }

    #[test]
    fn singular_operator_is_not_a_transform() {
        let g = Grid::line(0.0, 1.0, 6, false).unwrap();
        let m = CMatrix::from_element(6, 6, c(1.0));
        assert!(matches!(
            Transform::new(LinOp::endo(m, g, Side::Primal).unwrap()),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn metric_pushforward_preserves_inner_products() {
        let g = Grid::line(-6.0, 6.0, 25, false).unwrap();
        let mut r = rng::seeded(3);
        let rho = Transform::new(Kernel::GaussRho.assemble(&g, &g).unwrap()).unwrap();
        let l2 = l2_space(&g);
        let cases = [(rho, l2.clone()), (random_transform(&g, &mut r), {
            let q = rng::spd(&mut r, 25, 0.5, 2.0);
            let w = g.weight_matrix().map(|v| v.sqrt());
            CoordinateSpace::from_form(g.clone(), Side::Primal, &w * q * &w, Provenance::L2)
                .unwrap()
        })];
        for (w, s) in cases {
            let p = pushforward_metric(&w, &s).unwrap();
            for _ in 0..20 {
                let a = random(&g, &mut r, Side::Primal);
                let b = random(&g, &mut r, Side::Primal);
                let lhs = p.inner(&a, &b).unwrap();
                let wa = w.forward().apply(&a).unwrap();
                let wb = w.forward().apply(&b).unwrap();
                let rhs = s.inner(&wa, &wb).unwrap();
                assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
            }
        }
    }

    #[test]
    fn conjugation_preserves_spectrum() {
        let g = Grid::line(0.0, 1.0, 12, false).unwrap();
        let mut r = rng::seeded(4);
        let a = LinOp::endo(rng::hermitian(&mut r, 12), g.clone(), Side::Primal).unwrap();
        let w = random_transform(&g, &mut r);
        let at = conjugate_operator(&w, &a).unwrap();
        let ea = linalg::eigenvalues(a.matrix()).unwrap();
        let eb = linalg::eigenvalues(at.matrix()).unwrap();
        assert!(spectrum_distance(&ea, &eb) < 1e-8);
    }

    #[test]
    fn hermitian_conjugate_identities() {
        let per = Grid::line(0.0, 2.0 * PI, 32, true).unwrap();
        let l2 = l2_space(&per);
        let d = derivative_op(&per, 0, 1).unwrap().scaled(Complex64::new(0.0, -1.0));
        assert!(hermitian_defect(&d, &l2).unwrap() < 1e-8);
        let mut r = rng::seeded(5);
        let sym = {
            let m = rng::hermitian(&mut r, 32).map(|v| c(v.re));
            LinOp::endo(linalg::hermitian_part(&m), per.clone(), Side::Primal).unwrap()
        };
        let plus = hermitian_conjugate(&sym, &l2).unwrap();
        assert!((plus.matrix() - sym.matrix()).camax() < 1e-13);

        let g = Grid::line(0.0, 1.0, 25, true).unwrap();
        let form = g.weight_matrix() * rng::spd(&mut r, 25, 0.5, 2.0);
        let s = CoordinateSpace::from_form(g.clone(), Side::Primal, form, Provenance::L2).unwrap();
        let a = LinOp::endo(rng::complex_matrix(&mut r, 25), g.clone(), Side::Primal).unwrap();
        let ap = hermitian_conjugate(&a, &s).unwrap();
        for _ in 0..50 {
            let phi = random(&g, &mut r, Side::Primal);
            let psi = random(&g, &mut r, Side::Primal);
            let lhs = s.inner(&ap.apply(&phi).unwrap(), &psi).unwrap();
            let rhs = s.inner(&phi, &a.apply(&psi).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()), "{}", (lhs - rhs).norm());
        }
    }

    #[test]
    fn hermiticity_survives_coordinate_change() {
        let g = Grid::line(0.0, 1.0, 16, true).unwrap();
        let mut r = rng::seeded(6);
        let s = l2_space(&g);
        let a = LinOp::endo(rng::hermitian(&mut r, 16), g.clone(), Side::Primal).unwrap();
        assert!(hermitian_defect(&a, &s).unwrap() < 1e-12);
        let w = random_transform(&g, &mut r);
        let at = conjugate_operator(&w, &a).unwrap();
        let st = pushforward_metric(&w, &s).unwrap();
        assert!(hermitian_defect(&at, &st).unwrap() < 1e-9);
    }

    #[test]
    fn fourier_pair_diagonalises_derivative() {
        let fp = FourierPair::new(64).unwrap();
        let x = fp.x_grid().clone();
        let p = 3.0;
        let wave = sample(&x, |t| Complex64::from_polar(1.0, p * t[0])).unwrap();
        let s = pushforward_vector(&fp.sigma, &wave).unwrap();
        let peak = s.values().iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).unwrap();
        // σ(k,x) = e^{ikx} sends e^{ipx} to 2π δ(k+p)
        assert_eq!(fp.k_grid().node(peak.0)[0], -p);
        assert!((peak.1 - c(2.0 * PI)).norm() < 1e-10);
        let others: f64 = s.values().iter().enumerate().filter(|(i, _)| *i != peak.0).map(|(_, v)| v.norm()).fold(0.0, f64::max);
        assert!(others < 1e-10);
        // ω*f = δ(k − p)
        let g = pushforward_vector(&fp.omega, &fp.sigma.forward().apply(&wave).unwrap()).unwrap();
        assert!((g.values() - wave.values()).camax() < 1e-10);
        let dual = wave.clone().with_side(Side::Dual);
        let wf = fp.omega.adjoint().apply(&dual).unwrap();
        let j = fp.k_grid().nearest_node(&[p]).unwrap();
        assert!((wf.values()[j] - c(1.0)).norm() < 1e-10);

        let d = derivative_op(&x, 0, 1).unwrap().scaled(Complex64::new(0.0, -1.0));
        // σ(−iD)σ⁻¹ = σ(−iD)ω
        let conj = fp.sigma.forward().compose(&d.compose(fp.omega.forward()).unwrap()).unwrap();
        assert!(linalg::off_diagonal_mass(conj.matrix()) < 1e-6);
        let omega_t = Transform::new(fp.omega.forward().clone()).unwrap();
        let via = conjugate_operator(&omega_t, &d).unwrap();
        assert!(linalg::off_diagonal_mass(via.matrix()) < 1e-6);
    }

    #[test]
    fn first_order_relation_and_singularity() {
        let g = Grid::line(1.0, 3.0, 257, false).unwrap();
        let sol = solve_first_order_transform(
            &g,
            &|x| x,
            Arc::new(|_| c(1.0)),
            Arc::new(|_| c(1.0)),
        )
        .unwrap();
        assert!(sol.residual < 1e-3, "{}", sol.residual);
        let flat = solve_first_order_transform(&g, &|x| x, Arc::new(|_| c(0.0)), Arc::new(|_| c(1.0)))
            .unwrap();
        assert_eq!(flat.rank, 1);
        assert!(matches!(flat.into_transform(), Err(Error::Singular { .. })));
        let zero = Grid::line(-1.0, 1.0, 33, false).unwrap();
        assert!(solve_first_order_transform(&zero, &|x| x, Arc::new(|_| c(1.0)), Arc::new(|_| c(1.0)))
            .is_err());
    }

    #[test]
    fn fourier_kernel_solves_first_order_relation() {
        let g = Grid::line(-3.0, 3.0, 257, false).unwrap();
        let omega = Kernel::Fourier.assemble(&g, &g).unwrap();
        let r = first_order_residual(&omega, &|_| 1.0, &|y| Complex64::new(0.0, y)).unwrap();
        assert!(r < 1e-4, "{r}");
    }

    #[test]
    fn separable_kernel_maps_xd_to_d() {
        let g = Grid::line(1.0, 3.0, 257, false).unwrap();
        let sol = separable_intertwiner(&g, &|x| x, 1.0, 1.0).unwrap();
        for (x, y) in [(1.0, 1.0), (2.0, 1.5), (3.0, 3.0)] {
            let v = sol.kernel.eval(&[x], &[y]).unwrap().re;
            let exact = (x * (-y as f64).exp()).exp();
            assert!((v - exact).abs() < 1e-6 * exact, "{v} vs {exact}");
        }
        assert!(sol.residual < 1e-6, "{}", sol.residual);
        let xd = multiplication_op(&g, |x| c(x[0])).unwrap().compose(&derivative_op(&g, 0, 1).unwrap()).unwrap();
        let d = derivative_op(&g, 0, 1).unwrap();
        let bank = boundary_vanishing_bank(&g, 10).unwrap();
        let r = intertwining_residual(&xd, &sol.omega, &d, &bank).unwrap();
        assert!(r < 1e-3, "{r}");
        // a smooth separable kernel is numerically low-rank
        assert!(!sol.is_isomorphism());
    }

    #[test]
    fn translation_kernels_preserve_derivative() {
        let gauss = verify_derivative_preservation(&Kernel::GaussRho, -8.0, 8.0, 257).unwrap();
        assert!(gauss.residual_d < 1e-5 && gauss.residual_d2 < 1e-5, "{gauss:?}");
        assert!(gauss.refines());
        let shaped = translation_kernel("gauss_poly", |u| (-u * u).exp() * (1.0 + u * u));
        let rep = verify_derivative_preservation(&shaped, -8.0, 8.0, 257).unwrap();
        assert!(rep.residual_d < 1e-4 && rep.residual_d2 < 1e-4, "{rep:?}");
        let neg = verify_derivative_preservation(&Kernel::DampedGauss, -8.0, 8.0, 257).unwrap();
        assert!(neg.residual_d > 1e-2, "{neg:?}");
    }

    #[test]
    fn multiplication_is_preserved_only_trivially() {
        assert!(product_noninvariance_demo(&|_| 2.5).unwrap() < 1e-8);
        assert!(product_noninvariance_demo(&|x| x).unwrap() > 1e-2);
        let g = Grid::line(-8.0, 8.0, 129, false).unwrap();
        let mult = Kernel::PlaneWaveWeight.assemble(&g, &g).unwrap();
        let bank = band_limited_bank(&g).unwrap();
        assert!(product_noninvariance(&mult, &|x| x, &bank).unwrap() < 1e-8);
    }

    #[test]
    fn tensor_transformation_keeps_scalars() {
        let g = Grid::line(0.0, 1.0, 24, false).unwrap();
        let mut r = rng::seeded(8);
        let dd = Tensor12::delta_delta(&g).unwrap();
        let phi = random(&g, &mut r, Side::Primal);
        let sq = dd.apply(&phi, &phi).unwrap();
        let expect = phi.values().map(|v| v * v);
        assert!((sq.values() - expect).camax() < 1e-15);

        let slices = (0..24).map(|_| rng::complex_matrix(&mut r, 24)).collect();
        let t = Tensor12::new(g.clone(), slices).unwrap();
        let w = random_transform(&g, &mut r);
        let tt = pushforward_12tensor(&w, &t).unwrap();
        for _ in 0..10 {
            let f = random(&g, &mut r, Side::Dual);
            let phi = random(&g, &mut r, Side::Primal);
            let before = pairing(&f, &t.apply(&phi, &phi).unwrap()).unwrap();
            let pt = w.inverse().apply(&phi).unwrap();
            let ft = w.adjoint().apply(&f).unwrap();
            let after = pairing(&ft, &tt.apply(&pt, &pt).unwrap()).unwrap();
            assert!((before - after).norm() < 1e-6 * (1.0 + before.norm()));
        }
        let big = Grid::line(0.0, 1.0, 65, false).unwrap();
        assert!(Tensor12::delta_delta(&big).is_err());
    }
}
