//! Two-point kernels: pointwise evaluation, operator assembly on grids,
//! closed-form Gram values and mixed second derivatives on the diagonal.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, Side};
use crate::linalg::{c, CMatrix};
use crate::linop::LinOp;

type KernelFn = dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync;

/// A user-supplied kernel. Smoothness and symmetry are declared, not
/// inferred; they gate the Hessian and Gram pathways.
#[derive(Clone)]
pub struct CustomKernel {
    name: String,
    f: Arc<KernelFn>,
    smooth: bool,
    symmetric: bool,
}

impl CustomKernel {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(&[f64], &[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        CustomKernel { name: name.into(), f: Arc::new(f), smooth: false, symmetric: false }
    }

    pub fn smooth(mut self) -> Self {
        self.smooth = true;
        self
    }

    pub fn symmetric(mut self) -> Self {
        self.symmetric = true;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

impl fmt::Debug for CustomKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomKernel")
            .field("name", &self.name)
            .field("smooth", &self.smooth)
            .field("symmetric", &self.symmetric)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Kernel {
    /// `e^{−|x−y|²}`, the smoothing operator ρ.
    GaussRho,
    /// `e^{−s|x−y|²/2}`, unit on the diagonal.
    GaussMetric { scale: f64 },
    /// `e^{−|x−y|²−|x|²}`.
    DampedGauss,
    /// `e^{i x·y}`.
    Fourier,
    /// `(2π)^{−n} e^{−i x·y}`.
    InvFourier,
    /// `δ(x−y)`; diagonal only.
    Dirac,
    /// `(2π)^{−1/2} e^{−|x|²/2} δ(x−y)`; diagonal only.
    PlaneWaveWeight,
    /// `e^{−η(x−y, x−y)/2}` with `η = diag(signature)`.
    MinkowskiGauss { signature: Vec<i8> },
    /// `e^{−d²/2}` with `d` the chordal distance between angles on the unit
    /// circle, i.e. `e^{cos(x−y)−1}`. One-dimensional.
    ChordalCircle,
    Custom(CustomKernel),
}

impl Kernel {
    pub fn gauss_metric() -> Kernel {
        Kernel::GaussMetric { scale: 1.0 }
    }

    pub fn minkowski(signature: &[i8]) -> Kernel {
        Kernel::MinkowskiGauss { signature: signature.to_vec() }
    }

    /// Looks up a named family; `custom` is library-only.
    pub fn from_name(name: &str, signature: &[i8], scale: f64) -> Result<Kernel> {
        Ok(match name {
            "gauss_rho" => Kernel::GaussRho,
            "gauss_metric" => Kernel::GaussMetric { scale },
            "damped_gauss" => Kernel::DampedGauss,
            "fourier" => Kernel::Fourier,
            "inv_fourier" => Kernel::InvFourier,
            "dirac" => Kernel::Dirac,
            "plane_wave_weight" => Kernel::PlaneWaveWeight,
            "minkowski_gauss" => Kernel::minkowski(signature),
            "chordal_circle" => Kernel::ChordalCircle,
            other => return Err(Error::InvalidArgument(format!("unknown kernel family `{other}`"))),
        })
    }

    pub fn name(&self) -> &str {
        match self {
            Kernel::GaussRho => "gauss_rho",
            Kernel::GaussMetric { .. } => "gauss_metric",
            Kernel::DampedGauss => "damped_gauss",
            Kernel::Fourier => "fourier",
            Kernel::InvFourier => "inv_fourier",
            Kernel::Dirac => "dirac",
            Kernel::PlaneWaveWeight => "plane_wave_weight",
            Kernel::MinkowskiGauss { .. } => "minkowski_gauss",
            Kernel::ChordalCircle => "chordal_circle",
            Kernel::Custom(k) => &k.name,
        }
    }

    fn static_name(&self) -> &'static str {
        match self {
            Kernel::Dirac => "dirac",
            Kernel::PlaneWaveWeight => "plane_wave_weight",
            _ => "kernel",
        }
    }

    /// Distributional kernels supported on the diagonal `x = y`.
    pub fn is_diagonal(&self) -> bool {
        matches!(self, Kernel::Dirac | Kernel::PlaneWaveWeight)
    }

    pub fn is_real_symmetric(&self) -> bool {
        match self {
            Kernel::Fourier | Kernel::InvFourier | Kernel::DampedGauss => false,
            Kernel::Custom(k) => k.symmetric,
            _ => true,
        }
    }

    pub fn is_translation_invariant(&self) -> bool {
        matches!(
            self,
            Kernel::GaussRho
                | Kernel::GaussMetric { .. }
                | Kernel::MinkowskiGauss { .. }
                | Kernel::ChordalCircle
                | Kernel::Dirac
        )
    }

    pub fn has_analytic_hessian(&self) -> bool {
        matches!(
            self,
            Kernel::GaussRho
                | Kernel::GaussMetric { .. }
                | Kernel::DampedGauss
                | Kernel::MinkowskiGauss { .. }
                | Kernel::ChordalCircle
        )
    }

    /// Pointwise value `k(x, y)`. Diagonal kernels have no pointwise values.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<Complex64> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch(format!(
                "points of dimension {} and {}",
                x.len(),
                y.len()
            )));
        }
        let sq = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum() };
        let dot = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).map(|(a, b)| a * b).sum() };
        Ok(match self {
            Kernel::GaussRho => c((-sq(x, y)).exp()),
            Kernel::GaussMetric { scale } => c((-0.5 * scale * sq(x, y)).exp()),
            Kernel::DampedGauss => c((-sq(x, y) - dot(x, x)).exp()),
            Kernel::Fourier => Complex64::from_polar(1.0, dot(x, y)),
            Kernel::InvFourier => {
                Complex64::from_polar((2.0 * PI).powi(-(x.len() as i32)), -dot(x, y))
            }
            Kernel::MinkowskiGauss { signature } => {
                if signature.len() != x.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "signature of length {} for {}-dimensional points",
                        signature.len(),
                        x.len()
                    )));
                }
                let eta: f64 = signature
                    .iter()
                    .zip(x.iter().zip(y))
                    .map(|(&s, (a, b))| s as f64 * (a - b) * (a - b))
                    .sum();
                c((-0.5 * eta).exp())
            }
            Kernel::ChordalCircle => {
                if x.len() != 1 {
                    return Err(Error::DimensionMismatch(
                        "chordal circle kernel is one-dimensional".into(),
                    ));
                }
                c(((x[0] - y[0]).cos() - 1.0).exp())
            }
            Kernel::Custom(k) => (k.f)(x, y),
            Kernel::Dirac | Kernel::PlaneWaveWeight => {
                return Err(Error::Distributional {
                    family: self.static_name(),
                    what: "no pointwise values; use the diagonal weight",
                })
            }
        })
    }

    /// Weight `d(x)` of a diagonal kernel `d(x)δ(x−y)`.
    pub fn diagonal_weight(&self, x: &[f64]) -> Result<Complex64> {
        match self {
            Kernel::Dirac => Ok(c(1.0)),
            Kernel::PlaneWaveWeight => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                Ok(c((2.0 * PI).powf(-0.5 * x.len() as f64) * (-0.5 * r2).exp()))
            }
            _ => Err(Error::InvalidArgument(format!("`{}` is not a diagonal kernel", self.name()))),
        }
    }

    /// Matrix of the integral operator `(Af)(x) = ∫k(x,y)f(y)dy` from
    /// `grid_in` to `grid_out`, with the quadrature weights of `grid_in`
    /// folded into the columns. Diagonal kernels give `diag(d(x_i))`.
    pub fn assemble(&self, grid_in: &Arc<Grid>, grid_out: &Arc<Grid>) -> Result<LinOp> {
        if grid_in.dim() != grid_out.dim() {
            return Err(Error::DimensionMismatch(format!(
                "grids of dimension {} and {}",
                grid_in.dim(),
                grid_out.dim()
            )));
        }
        if self.is_diagonal() {
            grid_in.check_same(grid_out)?;
            let d: Result<Vec<Complex64>> =
                grid_in.nodes().map(|x| self.diagonal_weight(x)).collect();
            return LinOp::endo(crate::linalg::diag(d?), grid_in.clone(), Side::Primal);
        }
        let w = grid_in.weights();
        let mut m = CMatrix::zeros(grid_out.len(), grid_in.len());
        for (j, y) in grid_in.nodes().enumerate() {
            for (i, x) in grid_out.nodes().enumerate() {
                m[(i, j)] = self.eval(x, y)? * w[j];
            }
        }
        LinOp::new(m, grid_in.clone(), grid_out.clone(), Side::Primal, Side::Primal)
    }

    /// Kernel matrix `k(x_i, x_j)` on one grid, without quadrature weights.
    pub fn point_matrix(&self, grid: &Arc<Grid>) -> Result<CMatrix> {
        let n = grid.len();
        let mut m = CMatrix::zeros(n, n);
        for (j, y) in grid.nodes().enumerate() {
            for (i, x) in grid.nodes().enumerate() {
                m[(i, j)] = self.eval(x, y)?;
            }
        }
        Ok(m)
    }

    /// Factor `k_μ` of a product kernel `k(x,y) = Π_μ k_μ(x_μ, y_μ)`.
    pub fn axis_factor(&self, axis: usize) -> Option<Box<dyn Fn(f64, f64) -> f64 + Send + Sync>> {
        match self {
            Kernel::GaussRho => Some(Box::new(|x, y| (-(x - y) * (x - y)).exp())),
            Kernel::GaussMetric { scale } => {
                let s = *scale;
                Some(Box::new(move |x, y| (-0.5 * s * (x - y) * (x - y)).exp()))
            }
            Kernel::DampedGauss => Some(Box::new(|x, y| (-(x - y) * (x - y) - x * x).exp())),
            Kernel::MinkowskiGauss { signature } => {
                let s = *signature.get(axis)? as f64;
                Some(Box::new(move |x, y| (-0.5 * s * (x - y) * (x - y)).exp()))
            }
            Kernel::ChordalCircle if axis == 0 => Some(Box::new(|x, y| ((x - y).cos() - 1.0).exp())),
            _ => None,
        }
    }

    /// `g_μν(a) = ∂²k(x,y)/∂x^μ∂y^ν` at `x = y = a`.
    ///
    /// Closed forms for the Gaussian families; custom smooth kernels use a
    /// central difference with step 1e−4 and one Richardson level.
    pub fn mixed_hessian(&self, a: &[f64]) -> Result<DMatrix<f64>> {
        let n = a.len();
        match self {
            Kernel::Dirac | Kernel::PlaneWaveWeight => Err(Error::Distributional {
                family: self.static_name(),
                what: "not differentiable on the diagonal",
            }),
            Kernel::Fourier | Kernel::InvFourier => Err(Error::NotSymmetric(self.name().into())),
            Kernel::GaussRho => Ok(DMatrix::identity(n, n) * 2.0),
            Kernel::GaussMetric { scale } => Ok(DMatrix::identity(n, n) * *scale),
            Kernel::DampedGauss => {
                let r2: f64 = a.iter().map(|v| v * v).sum();
                Ok(DMatrix::identity(n, n) * (2.0 * (-r2).exp()))
            }
            Kernel::MinkowskiGauss { signature } => {
                if signature.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "signature of length {} at a {}-dimensional point",
                        signature.len(),
                        n
                    )));
                }
                Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    n,
                    signature.iter().map(|&s| s as f64),
                )))
            }
            Kernel::ChordalCircle => {
                if n != 1 {
                    return Err(Error::DimensionMismatch(
                        "chordal circle kernel is one-dimensional".into(),
                    ));
                }
                Ok(DMatrix::from_element(1, 1, 1.0))
            }
            Kernel::Custom(k) => {
                if !k.smooth {
                    return Err(Error::InvalidArgument(format!(
                        "custom kernel `{}` is not declared smooth",
                        k.name
                    )));
                }
                Ok(fd_mixed_hessian(|x, y| (k.f)(x, y).re, a, 1e-4))
            }
        }
    }
}

/// Central mixed difference with one Richardson step (`h` and `h/2`).
pub fn fd_mixed_hessian(k: impl Fn(&[f64], &[f64]) -> f64, a: &[f64], h: f64) -> DMatrix<f64> {
    let n = a.len();
    let stencil = |mu: usize, nu: usize, h: f64| -> f64 {
        let mut xp = a.to_vec();
        let mut xm = a.to_vec();
        let mut yp = a.to_vec();
        let mut ym = a.to_vec();
        xp[mu] += h;
        xm[mu] -= h;
        yp[nu] += h;
        ym[nu] -= h;
        (k(&xp, &yp) - k(&xp, &ym) - k(&xm, &yp) + k(&xm, &ym)) / (4.0 * h * h)
    };
    let mut g = DMatrix::zeros(n, n);
    for mu in 0..n {
        for nu in 0..n {
            g[(mu, nu)] = (4.0 * stencil(mu, nu, 0.5 * h) - stencil(mu, nu, h)) / 3.0;
        }
    }
    (&g + g.transpose()) * 0.5
}

/// `‖Σ λ_i δ_{a_i}‖²_H = Σ_ij λ_i λ_j k(a_i, a_j)`, straight from kernel
/// values.
pub fn gram_closed_form(kernel: &Kernel, lambdas: &[f64], points: &[Vec<f64>]) -> Result<f64> {
    if !kernel.is_real_symmetric() || kernel.is_diagonal() {
        return Err(Error::NotSymmetric(kernel.name().into()));
    }
    if lambdas.len() != points.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for {} points",
            lambdas.len(),
            points.len()
        )));
    }
    let mut total = 0.0;
    for (li, ai) in lambdas.iter().zip(points) {
        for (lj, aj) in lambdas.iter().zip(points) {
            total += li * lj * kernel.eval(ai, aj)?.re;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample, sample_real};

    #[test]
    fn gauss_metric_values() {
        let k = Kernel::gauss_metric();
        assert_eq!(k.eval(&[0.3], &[0.3]).unwrap(), c(1.0));
        let v = k.eval(&[0.0], &[2.0]).unwrap().re;
        assert!((v - 0.135_335_283_236_612_7).abs() < 1e-15);
    }

    #[test]
    fn minkowski_null_separation() {
        let k = Kernel::minkowski(&[1, -1]);
        assert_eq!(k.eval(&[1.0, 1.0], &[0.0, 0.0]).unwrap(), c(1.0));
    }

    #[test]
    fn distributional_kernels_reject_pointwise_requests() {
        assert!(matches!(Kernel::Dirac.eval(&[0.0], &[1.0]), Err(Error::Distributional { .. })));
        assert!(matches!(
            Kernel::PlaneWaveWeight.mixed_hessian(&[0.0]),
            Err(Error::Distributional { .. })
        ));
        assert!(Kernel::Dirac.mixed_hessian(&[0.0]).is_err());
    }

    #[test]
    fn symmetric_families_are_symmetric() {
        let pts = [[-1.3, 0.2], [0.7, 2.1], [0.0, -0.4]];
        for k in [Kernel::GaussRho, Kernel::gauss_metric(), Kernel::minkowski(&[1, -1])] {
            for x in &pts {
                for y in &pts {
                    let d = (k.eval(x, y).unwrap() - k.eval(y, x).unwrap()).norm();
                    assert!(d < 1e-14);
                }
            }
        }
    }

    #[test]
    fn dirac_assembles_to_identity() {
        let g = Grid::line(-1.0, 1.0, 9, false).unwrap();
        let op = Kernel::Dirac.assemble(&g, &g).unwrap();
        assert_eq!(op.matrix(), &CMatrix::identity(9, 9));
    }

    #[test]
    fn gauss_rho_smooths_constant_to_sqrt_pi() {
        let g = Grid::line(-6.0, 6.0, 257, false).unwrap();
        let rho = Kernel::GaussRho.assemble(&g, &g).unwrap();
        let one = sample_real(&g, |_| 1.0).unwrap();
        let out = rho.apply(&one).unwrap();
        for (v, x) in out.values().iter().zip(g.nodes()) {
            if x[0].abs() <= 1.0 {
                assert!((v.re - PI.sqrt()).abs() < 1e-8, "{} at {}", v.re, x[0]);
            }
        }
    }

    #[test]
    fn fourier_round_trip_on_gaussian() {
        let g = Grid::line(-6.0, 6.0, 257, false).unwrap();
        let sigma = Kernel::Fourier.assemble(&g, &g).unwrap();
        let omega = Kernel::InvFourier.assemble(&g, &g).unwrap();
        let f = sample(&g, |x| c((-0.5 * x[0] * x[0]).exp())).unwrap();
        let back = omega.apply(&sigma.apply(&f).unwrap()).unwrap();
        let err = (back.values() - f.values()).camax();
        assert!(err < 1e-6, "{err}");
    }

    #[test]
    fn analytic_hessians() {
        let id3 = DMatrix::<f64>::identity(3, 3);
        let g = Kernel::gauss_metric().mixed_hessian(&[0.1, -2.0, 3.0]).unwrap();
        assert!((g - &id3).amax() < 1e-12);
        let eta = Kernel::minkowski(&[1, -1]).mixed_hessian(&[0.0, 0.0]).unwrap();
        assert_eq!(eta, DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let s2 = Kernel::GaussMetric { scale: 2.0 }.mixed_hessian(&[0.5]).unwrap();
        assert!((s2[(0, 0)] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn finite_difference_hessian_matches_analytic() {
        let custom = Kernel::Custom(
            CustomKernel::new("gauss_times_one", |x: &[f64], y: &[f64]| {
                let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                c((-0.5 * r2).exp() * (1.0 + 0.0 * x[0]))
            })
            .smooth()
            .symmetric(),
        );
        for a in [[0.0, 0.0, 0.0], [1.5, -0.3, 2.2]] {
            let fd = custom.mixed_hessian(&a).unwrap();
            let exact = Kernel::gauss_metric().mixed_hessian(&a).unwrap();
            assert!((fd - exact).amax() < 1e-7);
        }
        let rough = Kernel::Custom(CustomKernel::new("rough", |_: &[f64], _: &[f64]| c(1.0)));
        assert!(rough.mixed_hessian(&[0.0]).is_err());
    }

    #[test]
    fn fd_hessian_of_rescaled_gaussian() {
        let fd = fd_mixed_hessian(
            |x, y| (-(x[0] - y[0]).powi(2)).exp(),
            &[0.4],
            1e-4,
        );
        assert!((fd[(0, 0)] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn translation_invariant_hessian_is_constant() {
        let k = Kernel::Custom(
            CustomKernel::new("shifted", |x: &[f64], y: &[f64]| {
                let u = x[0] - y[0];
                c((-u * u).exp() * (1.0 + u * u))
            })
            .smooth()
            .symmetric(),
        );
        let base = k.mixed_hessian(&[0.0]).unwrap()[(0, 0)];
        for a in [-2.3, -0.7, 0.4, 1.9, 3.3] {
            assert!((Kernel::GaussRho.mixed_hessian(&[a]).unwrap()[(0, 0)] - 2.0).abs() < 1e-10);
            // FD route: constancy holds to the roundoff of the stencil
            assert!((k.mixed_hessian(&[a]).unwrap()[(0, 0)] - base).abs() < 1e-7);
        }
    }

    #[test]
    fn axis_factors_multiply_to_kernel() {
        let x = [0.3, -1.2];
        let y = [1.1, 0.4];
        for k in [Kernel::GaussRho, Kernel::gauss_metric(), Kernel::DampedGauss, Kernel::minkowski(&[1, -1])] {
            let prod: f64 = (0..2).map(|m| k.axis_factor(m).unwrap()(x[m], y[m])).product();
            assert!((prod - k.eval(&x, &y).unwrap().re).abs() < 1e-15);
        }
        assert!(Kernel::Fourier.axis_factor(0).is_none());
    }

    #[test]
    fn gram_closed_form_values() {
        let k = Kernel::gauss_metric();
        assert_eq!(gram_closed_form(&k, &[1.0], &[vec![0.3]]).unwrap(), 1.0);
        assert_eq!(gram_closed_form(&k, &[1.0, -1.0], &[vec![0.0], vec![0.0]]).unwrap(), 0.0);
        let eps: f64 = 1e-3;
        let v = gram_closed_form(&k, &[1.0, -1.0], &[vec![0.0], vec![eps]]).unwrap();
        // 2(1 − e^{−ε²/2}) = ε² − ε⁴/4 + …
        let taylor = eps * eps - eps.powi(4) / 4.0;
        assert!((v - taylor).abs() < 1e-15, "{v}");
        assert!(gram_closed_form(&Kernel::Fourier, &[1.0], &[vec![0.0]]).is_err());
    }
}
