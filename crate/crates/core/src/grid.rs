//! Tensor-product grids with trapezoid / periodic quadrature, sampled
//! functions on them, grid and mollified deltas, and the discrete derivative
//! and multiplication operators.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, ZERO};
use crate::linop::LinOp;

/// Which side of the duality pairing a vector lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Primal,
    Dual,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Primal => Side::Dual,
            Side::Dual => Side::Primal,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Primal => "primal",
            Side::Dual => "dual",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub periodic: bool,
}

impl Axis {
    pub fn new(lo: f64, hi: f64, points: usize, periodic: bool) -> Self {
        Axis { lo, hi, points, periodic }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn spacing(&self) -> f64 {
        if self.periodic {
            self.length() / self.points as f64
        } else {
            self.length() / (self.points - 1) as f64
        }
    }

    /// Periodic axes exclude the right endpoint.
    pub fn coords(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|i| self.lo + i as f64 * h).collect()
    }

    pub fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        let mut w = vec![h; self.points];
        if !self.periodic {
            w[0] = 0.5 * h;
            w[self.points - 1] = 0.5 * h;
        }
        w
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.hi <= self.lo {
            return Err(Error::InvalidGrid(format!(
                "axis extent [{}, {}] is not positive",
                self.lo, self.hi
            )));
        }
        if self.points < 4 {
            return Err(Error::InvalidGrid(format!(
                "axis has {} points, at least 4 required",
                self.points
            )));
        }
        Ok(())
    }
}

/// A tensor-product lattice with per-node quadrature weights. Node ordering is
/// row-major: the last axis varies fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    signature: Vec<i8>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub const MAX_DIM: usize = 4;

impl Grid {
    pub fn new(axes: Vec<Axis>, signature: Vec<i8>) -> Result<Arc<Grid>> {
        if axes.is_empty() || axes.len() > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension {} outside 1..={MAX_DIM}",
                axes.len()
            )));
        }
        if signature.len() != axes.len() {
            return Err(Error::InvalidGrid(format!(
                "signature length {} does not match dimension {}",
                signature.len(),
                axes.len()
            )));
        }
        if let Some(s) = signature.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::InvalidGrid(format!("signature entry {s} is not ±1")));
        }
        for axis in &axes {
            axis.validate()?;
        }
        let dim = axes.len();
        let count: usize = axes.iter().map(|a| a.points).product();
        let coords: Vec<Vec<f64>> = axes.iter().map(Axis::coords).collect();
        let axis_w: Vec<Vec<f64>> = axes.iter().map(Axis::weights).collect();
        let mut nodes = Vec::with_capacity(count * dim);
        let mut weights = Vec::with_capacity(count);
        let mut idx = vec![0usize; dim];
        for _ in 0..count {
            let mut w = 1.0;
            for d in 0..dim {
                nodes.push(coords[d][idx[d]]);
                w *= axis_w[d][idx[d]];
            }
            weights.push(w);
            for d in (0..dim).rev() {
                idx[d] += 1;
                if idx[d] < axes[d].points {
                    break;
                }
                idx[d] = 0;
            }
        }
        Ok(Arc::new(Grid { axes, signature, nodes, weights }))
    }

    /// One-dimensional Euclidean grid.
    pub fn line(lo: f64, hi: f64, points: usize, periodic: bool) -> Result<Arc<Grid>> {
        Grid::new(vec![Axis::new(lo, hi, points, periodic)], vec![1])
    }

    /// Unit-weight periodic grid `0, 1, …, n−1` used to index spectra.
    pub fn index(n: usize) -> Result<Arc<Grid>> {
        Grid::line(0.0, n as f64, n, true)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn node(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.nodes[i * d..(i + 1) * d]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &[f64]> {
        self.nodes.chunks(self.dim())
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn volume(&self) -> f64 {
        self.axes.iter().map(Axis::length).product()
    }

    pub fn is_periodic(&self) -> bool {
        self.axes.iter().all(|a| a.periodic)
    }

    pub fn weight_matrix(&self) -> CMatrix {
        crate::linalg::real_diag(&self.weights)
    }

    pub fn inverse_weight_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            self.len(),
            self.weights.iter().map(|w| c(1.0 / w)),
        ))
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && self
                .axes
                .iter()
                .zip(point)
                .all(|(a, &x)| a.periodic || (x >= a.lo - 1e-12 && x <= a.hi + 1e-12))
    }

    /// Index of the node nearest to `point`, wrapping periodic axes.
    pub fn nearest_node(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {} on a {}-dimensional grid",
                point.len(),
                self.dim()
            )));
        }
        let mut index = 0usize;
        for (axis, &x) in self.axes.iter().zip(point) {
            let h = axis.spacing();
            let k = if axis.periodic {
                let t = (x - axis.lo).rem_euclid(axis.length());
                ((t / h).round() as usize) % axis.points
            } else {
                if x < axis.lo - 1e-12 || x > axis.hi + 1e-12 {
                    return Err(Error::InvalidArgument(format!("point {x} outside the grid")));
                }
                (((x - axis.lo) / h).round() as usize).min(axis.points - 1)
            };
            index = index * axis.points + k;
        }
        Ok(index)
    }

    pub(crate) fn same_as(self: &Arc<Self>, other: &Arc<Grid>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }

    pub(crate) fn check_same(self: &Arc<Self>, other: &Arc<Grid>) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{} nodes vs {} nodes on different lattices",
                self.len(),
                other.len()
            )))
        }
    }
}

/// Complex samples on a grid, tagged with the pairing side they live on.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: Arc<Grid>,
    values: CVector,
    side: Side,
}

impl SampledFunction {
    pub fn new(grid: Arc<Grid>, values: CVector, side: Side) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} values on a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(SampledFunction { grid, values, side })
    }

    pub fn zeros(grid: Arc<Grid>, side: Side) -> Self {
        let n = grid.len();
        SampledFunction { grid, values: CVector::zeros(n), side }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &CVector {
        &self.values
    }

    pub fn into_values(self) -> CVector {
        self.values
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        SampledFunction { grid: self.grid.clone(), values: &self.values * s, side: self.side }
    }

    pub fn map_values(&self, f: impl Fn(&CVector) -> CVector) -> Result<Self> {
        SampledFunction::new(self.grid.clone(), f(&self.values), self.side)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Real pipelines must not produce imaginary parts above `tol`.
    pub fn ensure_real(&self, tol: f64) -> Result<()> {
        let m = self.max_imag();
        if m > tol {
            Err(Error::InvalidArgument(format!("imaginary part {m:e} in a real pipeline")))
        } else {
            Ok(())
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn check_compatible(&self, other: &SampledFunction) -> Result<()> {
        self.grid.check_same(&other.grid)
    }
}

pub fn make_grid(axes: Vec<Axis>, signature: Vec<i8>) -> Result<Arc<Grid>> {
    Grid::new(axes, signature)
}

pub fn sample(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> Complex64) -> Result<SampledFunction> {
    let mut values = CVector::zeros(grid.len());
    for (i, x) in grid.nodes().enumerate() {
        let v = f(x);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonFinite { node: i, value: v.to_string() });
        }
        values[i] = v;
    }
    SampledFunction::new(grid.clone(), values, Side::Primal)
}

pub fn sample_real(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Result<SampledFunction> {
    sample(grid, |x| c(f(x)))
}

/// `Σ_i w_i conj(f_i) g_i`.
pub fn l2_inner(f: &SampledFunction, g: &SampledFunction) -> Result<Complex64> {
    f.check_compatible(g)?;
    if f.side != g.side {
        return Err(Error::SideMismatch { expected: f.side, got: g.side });
    }
    Ok(f.values
        .iter()
        .zip(g.values.iter())
        .zip(f.grid.weights())
        .map(|((a, b), &w)| a.conj() * b * w)
        .sum())
}

pub fn l2_norm(f: &SampledFunction) -> f64 {
    f.values
        .iter()
        .zip(f.grid.weights())
        .map(|(a, &w)| a.norm_sqr() * w)
        .sum::<f64>()
        .sqrt()
}

/// Bilinear duality pairing `f(φ) = Σ_i w_i f_i φ_i` of a dual vector with a
/// primal one.
pub fn pairing(f: &SampledFunction, phi: &SampledFunction) -> Result<Complex64> {
    f.check_compatible(phi)?;
    if f.side != Side::Dual {
        return Err(Error::SideMismatch { expected: Side::Dual, got: f.side });
    }
    if phi.side != Side::Primal {
        return Err(Error::SideMismatch { expected: Side::Primal, got: phi.side });
    }
    Ok(f.values
        .iter()
        .zip(phi.values.iter())
        .zip(f.grid.weights())
        .map(|((a, b), &w)| a * b * w)
        .sum())
}

/// Normalised Gaussian `(L/√π)^n e^{−L²|x−a|²}`, tagged dual.
pub fn mollified_delta(grid: &Arc<Grid>, a: &[f64], l: f64) -> Result<SampledFunction> {
    if a.len() != grid.dim() {
        return Err(Error::DimensionMismatch(format!(
            "centre of dimension {} on a {}-dimensional grid",
            a.len(),
            grid.dim()
        )));
    }
    if !grid.contains(a) {
        return Err(Error::InvalidArgument(format!("centre {a:?} outside the grid box")));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidArgument(format!("mollifier scale L = {l} must be positive")));
    }
    let radius = 3.0 / l;
    let inside = grid
        .nodes()
        .filter(|x| dist_sq(x, a) <= radius * radius)
        .count();
    if inside < 4 {
        return Err(Error::UnderResolved { nodes: inside, l });
    }
    let norm = (l / PI.sqrt()).powi(grid.dim() as i32);
    let values = CVector::from_iterator(
        grid.len(),
        grid.nodes().map(|x| c(norm * (-l * l * dist_sq(x, a)).exp())),
    );
    SampledFunction::new(grid.clone(), values, Side::Dual)
}

fn dist_sq(x: &[f64], a: &[f64]) -> f64 {
    x.iter().zip(a).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Exact discrete delta at node `k`: `1/w_k` at `k`, zero elsewhere, dual.
pub fn grid_delta(grid: &Arc<Grid>, k: usize) -> Result<SampledFunction> {
    if k >= grid.len() {
        return Err(Error::IndexOutOfRange { index: k, len: grid.len() });
    }
    let mut values = CVector::from_element(grid.len(), ZERO);
    values[k] = c(1.0 / grid.weights()[k]);
    SampledFunction::new(grid.clone(), values, Side::Dual)
}

/// Discretisation used for `d/dx` along one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DifferenceScheme {
    /// Fourier differentiation matrix; periodic axes only.
    Spectral,
    /// 4th-order central differences, wrap-around on periodic axes and
    /// one-sided 4th-order closures at non-periodic boundaries.
    Central4,
}

/// Default derivative: spectral on periodic axes, `Central4` otherwise.
pub fn derivative_op(grid: &Arc<Grid>, axis: usize, order: usize) -> Result<LinOp> {
    let scheme = match grid.axes().get(axis) {
        Some(a) if a.periodic => DifferenceScheme::Spectral,
        _ => DifferenceScheme::Central4,
    };
    derivative_op_with(grid, axis, order, scheme)
}

/// `∂^order/∂x_axis^order`; orders above one are powers of the first-order
/// matrix.
pub fn derivative_op_with(
    grid: &Arc<Grid>,
    axis: usize,
    order: usize,
    scheme: DifferenceScheme,
) -> Result<LinOp> {
    let ax = *grid.axes().get(axis).ok_or(Error::IndexOutOfRange {
        index: axis,
        len: grid.dim(),
    })?;
    if order == 0 {
        return Err(Error::InvalidArgument("derivative order must be at least 1".into()));
    }
    let d1 = match scheme {
        DifferenceScheme::Spectral => {
            if !ax.periodic {
                return Err(Error::InvalidArgument(
                    "spectral differentiation needs a periodic axis".into(),
                ));
            }
            spectral_matrix(&ax)
        }
        DifferenceScheme::Central4 => central4_matrix(&ax)?,
    };
    let mut d = d1.clone();
    for _ in 1..order {
        d = &d1 * d;
    }
    let before: usize = grid.axes()[..axis].iter().map(|a| a.points).product();
    let after: usize = grid.axes()[axis + 1..].iter().map(|a| a.points).product();
    let full = CMatrix::identity(before, before)
        .kronecker(&d)
        .kronecker(&CMatrix::identity(after, after));
    LinOp::endo(full, grid.clone(), Side::Primal)
}

fn spectral_matrix(ax: &Axis) -> CMatrix {
    let n = ax.points;
    let scale = 2.0 * PI / ax.length();
    let even = n % 2 == 0;
    CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return c(0.0);
        }
        let d = i as i64 - j as i64;
        let sign = if d.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let arg = d as f64 * PI / n as f64;
        let v = if even { 0.5 * sign / arg.tan() } else { 0.5 * sign / arg.sin() };
        c(v * scale)
    })
}

fn central4_matrix(ax: &Axis) -> Result<CMatrix> {
    let n = ax.points;
    let h = ax.spacing();
    let mut m = CMatrix::zeros(n, n);
    let interior = [(-2i64, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
    if ax.periodic {
        for i in 0..n {
            for &(off, coef) in &interior {
                let j = (i as i64 + off).rem_euclid(n as i64) as usize;
                m[(i, j)] += c(coef / (12.0 * h));
            }
        }
        return Ok(m);
    }
    if n < 5 {
        return Err(Error::InvalidGrid(
            "one-sided 4th-order closure needs at least 5 points".into(),
        ));
    }
    for i in 2..n - 2 {
        for &(off, coef) in &interior {
            m[(i, (i as i64 + off) as usize)] = c(coef / (12.0 * h));
        }
    }
    let first = [-25.0, 48.0, -36.0, 16.0, -3.0];
    let second = [-3.0, -10.0, 18.0, -6.0, 1.0];
    for k in 0..5 {
        m[(0, k)] = c(first[k] / (12.0 * h));
        m[(1, k)] = c(second[k] / (12.0 * h));
        m[(n - 1, n - 1 - k)] = c(-first[k] / (12.0 * h));
        m[(n - 2, n - 1 - k)] = c(-second[k] / (12.0 * h));
    }
    Ok(m)
}

/// `diag(m(x_i))`.
pub fn multiplication_op(grid: &Arc<Grid>, m: impl Fn(&[f64]) -> Complex64) -> Result<LinOp> {
    let f = sample(grid, m)?;
    LinOp::endo(
        CMatrix::from_diagonal(f.values()),
        grid.clone(),
        Side::Primal,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ONE;

    fn line(lo: f64, hi: f64, n: usize, periodic: bool) -> Arc<Grid> {
        Grid::line(lo, hi, n, periodic).unwrap()
    }

    #[test]
    fn trapezoid_weights() {
        let g = line(0.0, 1.0, 5, false);
        let expected = [0.125, 0.25, 0.25, 0.25, 0.125];
        for (w, e) in g.weights().iter().zip(expected) {
            assert!((w - e).abs() < 1e-15);
        }
    }

    #[test]
    fn periodic_weights_are_uniform() {
        let g = line(0.0, 2.0 * PI, 8, true);
        assert!(g.weights().iter().all(|w| (w - PI / 4.0).abs() < 1e-15));
    }

    #[test]
    fn weights_sum_to_box_volume() {
        let ax = Axis::new(-6.0, 6.0, 16, false);
        let g = Grid::new(vec![ax, ax], vec![1, 1]).unwrap();
        let total: f64 = g.weights().iter().sum();
        assert!((total - 144.0).abs() < 1e-12 * 144.0);
        assert_eq!(g.len(), 256);
    }

    #[test]
    fn grid_construction_errors() {
        assert!(matches!(Grid::line(1.0, 1.0, 8, false), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::line(0.0, 1.0, 3, false), Err(Error::InvalidGrid(_))));
        let ax = Axis::new(0.0, 1.0, 8, false);
        assert!(matches!(Grid::new(vec![ax], vec![1, -1]), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(vec![ax], vec![2]), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn sampling_rejects_non_finite() {
        let g = line(-1.0, 1.0, 9, false);
        let err = sample_real(&g, |x| 1.0 / x[0]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { node: 4, .. }));
    }

    #[test]
    fn constant_samples_to_ones() {
        let g = line(0.0, 1.0, 7, false);
        let f = sample_real(&g, |_| 1.0).unwrap();
        assert!(f.values().iter().all(|v| *v == ONE));
        assert_eq!(f.side(), Side::Primal);
        assert!((l2_inner(&f, &f).unwrap().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_l2_mass() {
        let g = line(-6.0, 6.0, 257, false);
        let f = sample_real(&g, |x| (-x[0] * x[0]).exp()).unwrap();
        let v = l2_inner(&f, &f).unwrap();
        assert!((v.re - (PI / 2.0).sqrt()).abs() < 1e-6);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn periodic_trig_integrals() {
        let g = line(0.0, 2.0 * PI, 64, true);
        let s = sample_real(&g, |x| x[0].sin()).unwrap();
        let co = sample_real(&g, |x| x[0].cos()).unwrap();
        assert!((l2_inner(&s, &s).unwrap().re - PI).abs() < 1e-10);
        assert!(l2_inner(&s, &co).unwrap().norm() < 1e-12);
        let e = sample(&g, |x| Complex64::from_polar(1.0, x[0])).unwrap();
        assert!((l2_inner(&e, &e).unwrap() - c(2.0 * PI)).norm() < 1e-10);
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_slot() {
        let g = line(0.0, 2.0 * PI, 16, true);
        let f = sample(&g, |x| Complex64::new(x[0].cos(), x[0].sin())).unwrap();
        let h = sample(&g, |x| Complex64::new(1.0, x[0])).unwrap();
        let s = Complex64::new(0.3, -1.7);
        let lhs = l2_inner(&f.scaled(s), &h).unwrap();
        let rhs = s.conj() * l2_inner(&f, &h).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn inner_product_rejects_mismatched_grids() {
        let a = sample_real(&line(0.0, 1.0, 8, false), |_| 1.0).unwrap();
        let b = sample_real(&line(0.0, 2.0, 8, false), |_| 1.0).unwrap();
        assert!(matches!(l2_inner(&a, &b), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn mollifier_has_unit_mass() {
        let g = line(-6.0, 6.0, 257, false);
        let f = mollified_delta(&g, &[0.0], 4.0).unwrap();
        let one = sample_real(&g, |_| 1.0).unwrap();
        assert!((pairing(&f, &one).unwrap().re - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mollifier_pairing_extrapolates_to_point_value() {
        // pairing(f_L, x²) at a = 1 equals 1 + 1/(2L²); one Richardson step in
        // 1/L² removes the smoothing term.
        let g = line(-6.0, 6.0, 257, false);
        let phi = sample_real(&g, |x| x[0] * x[0]).unwrap();
        let vals: Vec<f64> = [4.0, 8.0, 16.0]
            .iter()
            .map(|&l| pairing(&mollified_delta(&g, &[1.0], l).unwrap(), &phi).unwrap().re)
            .collect();
        for (v, l) in vals.iter().zip([4.0f64, 8.0, 16.0]) {
            assert!((v - (1.0 + 0.5 / (l * l))).abs() < 1e-6, "{v} at L={l}");
        }
        let extrapolated = (4.0 * vals[2] - vals[1]) / 3.0;
        assert!((extrapolated - 1.0).abs() < 1e-4);
    }

    #[test]
    fn under_resolved_mollifier_is_rejected() {
        let g = line(-6.0, 6.0, 33, false);
        let err = mollified_delta(&g, &[0.0], 50.0).unwrap_err();
        assert!(matches!(err, Error::UnderResolved { .. }));
    }

    #[test]
    fn grid_delta_evaluates_exactly() {
        let g = line(-1.0, 2.0, 11, false);
        let phi = sample_real(&g, |x| (3.0 * x[0]).sin() + x[0]).unwrap();
        let mut mass = c(0.0);
        for k in 0..g.len() {
            let d = grid_delta(&g, k).unwrap();
            // exact up to the rounding of w_k · (1/w_k)
            let v = pairing(&d, &phi).unwrap();
            assert!((v - phi.values()[k]).norm() <= 4.0 * f64::EPSILON * phi.values()[k].norm());
            mass += pairing(&d, &phi).unwrap() * g.weights()[k];
        }
        let l2_mass: Complex64 = phi.values().iter().zip(g.weights()).map(|(v, w)| v * w).sum();
        assert!((mass - l2_mass).norm() < 1e-14);
        let a = grid_delta(&g, 2).unwrap();
        let b = grid_delta(&g, 3).unwrap();
        assert_eq!(l2_inner(&a, &b).unwrap(), c(0.0));
        assert!(matches!(grid_delta(&g, 11), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn spectral_derivative_of_sine() {
        let g = line(0.0, 2.0 * PI, 64, true);
        let d = derivative_op(&g, 0, 1).unwrap();
        let s = sample_real(&g, |x| x[0].sin()).unwrap();
        let ds = d.apply(&s).unwrap();
        let err = ds
            .values()
            .iter()
            .zip(g.nodes())
            .map(|(v, x)| (v - c(x[0].cos())).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "{err}");
        let d2 = derivative_op(&g, 0, 2).unwrap();
        let dds = d2.apply(&s).unwrap();
        let err2 = dds
            .values()
            .iter()
            .zip(s.values().iter())
            .map(|(a, b)| (a + b).norm())
            .fold(0.0, f64::max);
        assert!(err2 < 1e-4, "{err2}");
    }

    #[test]
    fn derivative_annihilates_constants() {
        for (g, scheme) in [
            (line(0.0, 2.0 * PI, 64, true), DifferenceScheme::Spectral),
            (line(0.0, 2.0 * PI, 64, true), DifferenceScheme::Central4),
            (line(-1.0, 3.0, 41, false), DifferenceScheme::Central4),
        ] {
            let d = derivative_op_with(&g, 0, 1, scheme).unwrap();
            let one = sample_real(&g, |_| 1.0).unwrap();
            assert!(d.apply(&one).unwrap().sup_norm() < 1e-12);
        }
    }

    #[test]
    fn periodic_derivative_is_circulant_and_antisymmetric() {
        let g = line(0.0, 2.0 * PI, 32, true);
        for scheme in [DifferenceScheme::Spectral, DifferenceScheme::Central4] {
            let d = derivative_op_with(&g, 0, 1, scheme).unwrap();
            let m = d.matrix();
            let n = m.nrows();
            for i in 0..n {
                for j in 0..n {
                    let shifted = m[((i + 1) % n, (j + 1) % n)];
                    assert!((m[(i, j)] - shifted).norm() < 1e-12);
                    assert!((m[(i, j)] + m[(j, i)]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn central4_is_fourth_order_on_open_interval() {
        let errs: Vec<f64> = [41usize, 81]
            .iter()
            .map(|&n| {
                let g = line(0.0, 2.0, n, false);
                let d = derivative_op(&g, 0, 1).unwrap();
                let f = sample_real(&g, |x| (2.0 * x[0]).exp()).unwrap();
                let df = d.apply(&f).unwrap();
                df.values()
                    .iter()
                    .zip(g.nodes())
                    .map(|(v, x)| (v.re - 2.0 * (2.0 * x[0]).exp()).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 3.7, "observed order {order}");
    }

    #[test]
    fn multiplication_and_commutator() {
        let g = line(0.0, 2.0 * PI, 64, true);
        let one = multiplication_op(&g, |_| c(1.0)).unwrap();
        assert_eq!(one.matrix(), &CMatrix::identity(64, 64));
        let x = multiplication_op(&g, |p| c(p[0])).unwrap();
        let delta = grid_delta(&g, 5).unwrap().with_side(Side::Primal);
        let xd = x.apply(&delta).unwrap();
        let expected = delta.scaled(c(g.node(5)[0]));
        assert!((xd.values() - expected.values()).norm() < 1e-15);

        // [D, x]φ = φ on a function vanishing with its derivatives at the ends.
        let g = line(-6.0, 6.0, 257, false);
        let d = derivative_op(&g, 0, 1).unwrap();
        let x = multiplication_op(&g, |p| c(p[0])).unwrap();
        let comm = d.compose(&x).unwrap().sub(&x.compose(&d).unwrap()).unwrap();
        let phi = sample_real(&g, |p| (-p[0] * p[0]).exp() * (1.0 + p[0])).unwrap();
        let out = comm.apply(&phi).unwrap();
        let err = (out.values() - phi.values()).camax();
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn derivative_along_second_axis() {
        let ax0 = Axis::new(0.0, 2.0 * PI, 16, true);
        let ax1 = Axis::new(0.0, 2.0 * PI, 32, true);
        let g = Grid::new(vec![ax0, ax1], vec![1, 1]).unwrap();
        let d = derivative_op(&g, 1, 1).unwrap();
        let f = sample_real(&g, |x| x[0].cos() * (2.0 * x[1]).sin()).unwrap();
        let df = d.apply(&f).unwrap();
        let err = df
            .values()
            .iter()
            .zip(g.nodes())
            .map(|(v, x)| (v.re - 2.0 * x[0].cos() * (2.0 * x[1]).cos()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn nearest_node_wraps_periodic_axes() {
        let g = line(0.0, 2.0 * PI, 64, true);
        assert_eq!(g.nearest_node(&[0.0]).unwrap(), g.nearest_node(&[2.0 * PI]).unwrap());
        assert_eq!(g.nearest_node(&[2.0 * PI * 63.0 / 64.0]).unwrap(), 63);
    }
}
