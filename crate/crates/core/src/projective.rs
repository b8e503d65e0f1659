//! The Riemannian metric `G = K/‖φ‖²` on the punctured reference space, its
//! Levi-Civita connection, and Schrödinger flow as geodesic motion on the
//! unit sphere.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, cholesky, hermitian_deviation, hermitian_eig, CMatrix, CVector, I};

/// Largest reference-space dimension.
pub const MAX_DIM: usize = 64;

/// Tolerance on `‖K − K*‖ / ‖K‖`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Unit-norm and tangency tolerance for geodesic states.
pub const STATE_TOL: f64 = 1e-9;

pub const MIN_STEPS: usize = 16;

/// Finite-difference step of the Levi-Civita check.
pub const FD_STEP: f64 = 1e-5;

/// `G(ξ, η) = (Kξ, η) / (φ, φ)` at a base point `φ ≠ 0`.
#[derive(Debug, Clone)]
pub struct ProjectiveMetric {
    k: Arc<CMatrix>,
    k_inv: Arc<CMatrix>,
    phi: CVector,
    norm2: f64,
}

fn check_base(phi: &CVector) -> Result<f64> {
    let norm2 = phi.norm_squared();
    if norm2 == 0.0 || !norm2.is_finite() {
        return Err(Error::ZeroBasePoint);
    }
    Ok(norm2)
}

impl ProjectiveMetric {
    /// Takes any Hermitian positive-definite `K`.
    pub fn new(k: CMatrix, phi: CVector) -> Result<Self> {
        let n = k.nrows();
        if k.ncols() != n || phi.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "K is {}x{}, base point has length {}",
                k.nrows(),
                k.ncols(),
                phi.len()
            )));
        }
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidArgument(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        let deviation = hermitian_deviation(&k);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        let k_inv = cholesky(&k)?.inverse();
        let norm2 = check_base(&phi)?;
        Ok(ProjectiveMetric { k: Arc::new(k), k_inv: Arc::new(k_inv), phi, norm2 })
    }

    /// `K = (AA*)⁻¹` for an invertible `A`; `K⁻¹ = AA*` is kept exactly.
    pub fn from_operator(a: &CMatrix, phi: CVector) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || phi.len() != n {
            return Err(Error::DimensionMismatch("A must be square and match φ".into()));
        }
        if n == 0 || n > MAX_DIM {
            return Err(Error::InvalidArgument(format!("dimension {n} outside 1..={MAX_DIM}")));
        }
        let k_inv = a * a.adjoint();
        let k_inv = (&k_inv + k_inv.adjoint()) * c(0.5);
        let condition = crate::linalg::condition_number(a);
        if condition > crate::spaces::MAX_CONDITION {
            return Err(Error::Singular { condition });
        }
        let k = cholesky(&k_inv)?.inverse();
        let k = (&k + k.adjoint()) * c(0.5);
        let norm2 = check_base(&phi)?;
        Ok(ProjectiveMetric { k: Arc::new(k), k_inv: Arc::new(k_inv), phi, norm2 })
    }

    /// Same `K` at another base point.
    pub fn at(&self, phi: CVector) -> Result<Self> {
        if phi.len() != self.dim() {
            return Err(Error::DimensionMismatch("base point length".into()));
        }
        let norm2 = check_base(&phi)?;
        Ok(ProjectiveMetric { k: self.k.clone(), k_inv: self.k_inv.clone(), phi, norm2 })
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn k(&self) -> &CMatrix {
        &self.k
    }

    pub fn k_inv(&self) -> &CMatrix {
        &self.k_inv
    }

    pub fn base(&self) -> &CVector {
        &self.phi
    }

    /// `(Kξ, η) / ‖φ‖²`, linear in `ξ`.
    pub fn value(&self, xi: &CVector, eta: &CVector) -> Complex64 {
        eta.dotc(&(&*self.k * xi)) / self.norm2
    }

    /// Real form `G_R(X, Y) = 2 Re G(ξ, η)`.
    pub fn real_value(&self, xi: &CVector, eta: &CVector) -> f64 {
        2.0 * self.value(xi, eta).re
    }

    /// `δg_{ab̄}/δφ^c` as the matrix `g_c` with `(g_c)[b][a] = ∂g_{ab̄}/∂φ^c`,
    /// laid out like `K` so that `G` reads `ηᴴ g ξ`.
    pub fn metric_derivative(&self, index: usize) -> CMatrix {
        &*self.k * (-self.phi[index].conj() / (self.norm2 * self.norm2))
    }

    /// `δg_{ab̄}/δφ̄^c`, same layout.
    pub fn metric_derivative_conj(&self, index: usize) -> CMatrix {
        &*self.k * (-self.phi[index] / (self.norm2 * self.norm2))
    }
}

fn check_len(metric: &ProjectiveMetric, v: &CVector) -> Result<()> {
    if v.len() != metric.dim() {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} at a {}-dimensional base point",
            v.len(),
            metric.dim()
        )));
    }
    Ok(())
}

/// Holomorphic component of `Γ(X, Y)` for `X = (ξ, ξ̄)`, `Y = (η, η̄)`,
/// summed over the three non-vanishing families `Γ^b_{cd}`, `Γ^b_{cd̄}` and
/// `Γ^b_{c̄d}`. Together they collect to
/// `−[Re(φᴴξ)η + Re(φᴴη)ξ − Re(ηᴴKξ)K⁻¹φ] / ‖φ‖²`.
/// The antiholomorphic component is the conjugate.
pub fn christoffel_contract(
    metric: &ProjectiveMetric,
    xi: &CVector,
    eta: &CVector,
) -> Result<CVector> {
    check_len(metric, xi)?;
    check_len(metric, eta)?;
    let phi = &metric.phi;
    // unsymmetrized families, kept apart so each is visible
    let holo = (eta * phi.dotc(xi) + xi * phi.dotc(eta)) * c(-0.5);
    let mixed = (xi * eta.dotc(phi) - &*metric.k_inv * (phi * eta.dotc(&(&*metric.k * xi))))
        * c(-0.5);
    let anti = (eta * xi.dotc(phi) - &*metric.k_inv * (phi * xi.dotc(&(&*metric.k * eta))))
        * c(-0.5);
    Ok((holo + mixed + anti) / c(metric.norm2))
}

/// `2G_R(Γ(X,Y), Z) − [dG_R X(Y,Z) + dG_R Y(Z,X) − dG_R Z(X,Y)]`, with the
/// metric derivatives by central differences of step `FD_STEP`.
pub fn levi_civita_residual(
    metric: &ProjectiveMetric,
    x: &CVector,
    y: &CVector,
    z: &CVector,
) -> Result<f64> {
    let gamma = christoffel_contract(metric, x, y)?;
    check_len(metric, z)?;
    let left = 2.0 * metric.real_value(&gamma, z);
    let derivative = |dir: &CVector, u: &CVector, v: &CVector| -> Result<f64> {
        let h = c(FD_STEP);
        let plus = metric.at(&metric.phi + dir * h)?;
        let minus = metric.at(&metric.phi - dir * h)?;
        Ok((plus.real_value(u, v) - minus.real_value(u, v)) / (2.0 * FD_STEP))
    };
    let right = derivative(x, y, z)? + derivative(y, z, x)? - derivative(z, x, y)?;
    Ok(left - right)
}

/// `φ_τ = e^{−iAτ}φ₀` from one eigendecomposition of `A`.
#[derive(Debug, Clone)]
pub struct SchrodingerFlow {
    a: CMatrix,
    values: Vec<f64>,
    vectors: CMatrix,
    coefficients: CVector,
}

#[derive(Debug, Clone)]
pub struct FlowPoint {
    pub phi: CVector,
    /// `−iAφ_τ`
    pub velocity: CVector,
    /// `−A²φ_τ`
    pub acceleration: CVector,
}

impl SchrodingerFlow {
    pub fn new(a: &CMatrix, phi0: &CVector) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || phi0.len() != n {
            return Err(Error::DimensionMismatch("A must be square and match φ₀".into()));
        }
        let deviation = hermitian_deviation(a);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        if (phi0.norm() - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "initial state has norm {}, expected 1",
                phi0.norm()
            )));
        }
        let (values, vectors) = hermitian_eig(a);
        let coefficients = vectors.adjoint() * phi0;
        Ok(SchrodingerFlow { a: a.clone(), values, vectors, coefficients })
    }

    pub fn at(&self, tau: f64) -> FlowPoint {
        let rotated = CVector::from_iterator(
            self.values.len(),
            self.values.iter().zip(self.coefficients.iter()).map(|(&l, &z)| z * (-I * l * tau).exp()),
        );
        let phi = &self.vectors * rotated;
        let a_phi = &self.a * &phi;
        let velocity = &a_phi * (-I);
        let acceleration = -(&self.a * a_phi);
        FlowPoint { phi, velocity, acceleration }
    }
}

pub fn schrodinger_flow(a: &CMatrix, phi0: &CVector, tau: f64) -> Result<FlowPoint> {
    Ok(SchrodingerFlow::new(a, phi0)?.at(tau))
}

/// Largest `‖φ̈ + Γ(φ̇, φ̇)‖` along `e^{−iAτ}φ₀` with `K = (AA*)⁻¹`.
pub fn geodesic_residual(a: &CMatrix, phi0: &CVector, taus: &[f64]) -> Result<f64> {
    let flow = SchrodingerFlow::new(a, phi0)?;
    let metric = ProjectiveMetric::from_operator(a, phi0.clone())?;
    let mut worst: f64 = 0.0;
    for &tau in taus {
        let p = flow.at(tau);
        let here = metric.at(p.phi)?;
        let gamma = christoffel_contract(&here, &p.velocity, &p.velocity)?;
        worst = worst.max((p.acceleration + gamma).norm());
    }
    Ok(worst)
}

/// A point of the unit sphere with a tangent velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub phi: CVector,
    pub velocity: CVector,
    pub tau: f64,
}

impl GeodesicState {
    pub fn new(phi: CVector, velocity: CVector, tau: f64) -> Result<Self> {
        if phi.len() != velocity.len() {
            return Err(Error::DimensionMismatch("φ and φ̇ differ in length".into()));
        }
        let state = GeodesicState { phi, velocity, tau };
        if state.norm_defect().abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "state is off the unit sphere by {:e}",
                state.norm_defect()
            )));
        }
        if state.tangency().abs() > STATE_TOL {
            return Err(Error::InvalidArgument(format!(
                "velocity is not tangent: Re(φ, φ̇) = {:e}",
                state.tangency()
            )));
        }
        Ok(state)
    }

    /// `‖φ‖ − 1`
    pub fn norm_defect(&self) -> f64 {
        self.phi.norm() - 1.0
    }

    /// `Re(φ, φ̇)`
    pub fn tangency(&self) -> f64 {
        self.phi.dotc(&self.velocity).re
    }
}

/// Classic RK4 on `φ' = v`, `v' = −Γ_φ(v, v)` with `K` taken from `family`
/// and no projection back onto the sphere.
pub fn geodesic_integrate(
    state0: &GeodesicState,
    family: &ProjectiveMetric,
    tau_end: f64,
    steps: usize,
) -> Result<Vec<GeodesicState>> {
    if steps < MIN_STEPS {
        return Err(Error::InvalidArgument(format!("need at least {MIN_STEPS} steps, got {steps}")));
    }
    check_len(family, &state0.phi)?;
    let h = (tau_end - state0.tau) / steps as f64;
    let force = |phi: &CVector, v: &CVector| -> Result<CVector> {
        Ok(-christoffel_contract(&family.at(phi.clone())?, v, v)?)
    };
    let mut path = Vec::with_capacity(steps + 1);
    path.push(state0.clone());
    let (mut phi, mut v) = (state0.phi.clone(), state0.velocity.clone());
    let ch = c(h);
    let half = c(0.5 * h);
    for k in 1..=steps {
        let tau = state0.tau + h * k as f64;
        let stage = || -> Result<(CVector, CVector)> {
            let k1p = v.clone();
            let k1v = force(&phi, &v)?;
            let (p2, v2) = (&phi + &k1p * half, &v + &k1v * half);
            let k2v = force(&p2, &v2)?;
            let (p3, v3) = (&phi + &v2 * half, &v + &k2v * half);
            let k3v = force(&p3, &v3)?;
            let (p4, v4) = (&phi + &v3 * ch, &v + &k3v * ch);
            let k4v = force(&p4, &v4)?;
            let sixth = c(h / 6.0);
            let np = &phi + (k1p + &v2 * c(2.0) + &v3 * c(2.0) + v4) * sixth;
            let nv = &v + (k1v + k2v * c(2.0) + k3v * c(2.0) + k4v) * sixth;
            Ok((np, nv))
        };
        let (np, nv) = stage().map_err(|e| match e {
            Error::ZeroBasePoint => Error::NonFiniteState { tau },
            other => other,
        })?;
        if np.iter().chain(nv.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFiniteState { tau });
        }
        phi = np;
        v = nv;
        path.push(GeodesicState { phi: phi.clone(), velocity: v.clone(), tau });
    }
    Ok(path)
}
