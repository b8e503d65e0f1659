//! Delta-function embeddings of parameter manifolds: induced metrics from
//! kernels, quadratic forms along delta paths, Gram structure of finite
//! delta sets, and the mollifier cross-checks of the formal calculus.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{grid_delta, mollified_delta, pairing, sample_real, Grid};
use crate::kernels::Kernel;

/// Step of the 4th-order central difference for path velocities.
pub const VELOCITY_STEP: f64 = 1e-3;

/// Largest delta set for which Gram matrices are built.
pub const MAX_GRAM: usize = 8;

type Curve = dyn Fn(f64) -> Vec<f64> + Send + Sync;

/// A parameter curve `a(t)` standing for the path `φ_t = δ(x − a(t))`.
#[derive(Clone)]
pub struct DeltaPath {
    curve: Arc<Curve>,
    dim: usize,
    times: Vec<f64>,
    points: Vec<Vec<f64>>,
    velocities: Vec<Vec<f64>>,
}

impl std::fmt::Debug for DeltaPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeltaPath")
            .field("dim", &self.dim)
            .field("steps", &self.times.len())
            .finish()
    }
}

/// `(−a(t+2δ) + 8a(t+δ) − 8a(t−δ) + a(t−2δ)) / 12δ`.
fn central4(curve: &Curve, t: f64, delta: f64) -> Vec<f64> {
    let (p2, p1, m1, m2) =
        (curve(t + 2.0 * delta), curve(t + delta), curve(t - delta), curve(t - 2.0 * delta));
    (0..p1.len())
        .map(|k| (-p2[k] + 8.0 * p1[k] - 8.0 * m1[k] + m2[k]) / (12.0 * delta))
        .collect()
}

impl DeltaPath {
    /// Samples `curve` at `steps` equally spaced times in `[t0, t1]`.
    pub fn new(
        dim: usize,
        t0: f64,
        t1: f64,
        steps: usize,
        curve: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if steps < 2 || !(t1 > t0) || dim == 0 {
            return Err(Error::InvalidArgument(format!(
                "path needs dim >= 1, steps >= 2 and t1 > t0 (got {dim}, {steps}, [{t0}, {t1}])"
            )));
        }
        let curve: Arc<Curve> = Arc::new(curve);
        let times: Vec<f64> =
            (0..steps).map(|k| t0 + (t1 - t0) * k as f64 / (steps - 1) as f64).collect();
        let mut points = Vec::with_capacity(steps);
        let mut velocities = Vec::with_capacity(steps);
        for &t in &times {
            let p = curve(t);
            if p.len() != dim || p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "curve value at t = {t} is not a finite {dim}-vector"
                )));
            }
            points.push(p);
            velocities.push(central4(&*curve, t, VELOCITY_STEP));
        }
        Ok(DeltaPath { curve, dim, times, points, velocities })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn velocities(&self) -> &[Vec<f64>] {
        &self.velocities
    }

    pub fn at(&self, t: f64) -> Vec<f64> {
        (self.curve)(t)
    }

    pub fn velocity_at(&self, t: f64) -> Vec<f64> {
        central4(&*self.curve, t, VELOCITY_STEP)
    }

    /// Errors with the first time at which the path leaves the grid's box.
    pub fn check_inside(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{}-dimensional path on a {}-dimensional grid",
                self.dim,
                grid.dim()
            )));
        }
        for (t, p) in self.times.iter().zip(&self.points) {
            if !grid.contains(p) {
                return Err(Error::InvalidArgument(format!("path leaves the domain at t = {t}")));
            }
        }
        Ok(())
    }
}

/// `g_μν(a) = ∂²k/∂x^μ∂y^ν |_{x=y=a}`, symmetrized.
pub fn induced_metric(kernel: &Kernel, a: &[f64]) -> Result<DMatrix<f64>> {
    let g = kernel.mixed_hessian(a)?;
    Ok((&g + g.transpose()) * 0.5)
}

/// A parameter grid embedded into a function space through `a ↦ δ_a`.
#[derive(Debug, Clone)]
pub struct EmbeddedManifold {
    grid: Arc<Grid>,
    kernel: Kernel,
    metric: Vec<DMatrix<f64>>,
}

impl EmbeddedManifold {
    pub fn new(grid: Arc<Grid>, kernel: Kernel) -> Result<Self> {
        if grid.dim() > 3 {
            return Err(Error::InvalidGrid(format!(
                "parameter manifolds have at most 3 dimensions, got {}",
                grid.dim()
            )));
        }
        let metric = grid.nodes().map(|a| induced_metric(&kernel, a)).collect::<Result<_>>()?;
        Ok(EmbeddedManifold { grid, kernel, metric })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn signature(&self) -> &[i8] {
        self.grid.signature()
    }

    /// Induced metric at a grid node.
    pub fn metric_at(&self, node: usize) -> &DMatrix<f64> {
        &self.metric[node]
    }

    /// Largest `|g_μν(a) − g_μν(b)|` over all nodes.
    pub fn metric_spread(&self) -> f64 {
        let first = &self.metric[0];
        self.metric.iter().map(|g| (g - first).amax()).fold(0.0, f64::max)
    }

    pub fn quadratic_form(&self, path: &DeltaPath) -> Result<Vec<f64>> {
        path.check_inside(&self.grid)?;
        path_quadratic_form(&self.kernel, path)
    }
}

/// `q(t) = g_μν(a(t)) ȧ^μ ȧ^ν`; indefinite kernels are allowed.
pub fn path_quadratic_form(kernel: &Kernel, path: &DeltaPath) -> Result<Vec<f64>> {
    path.points
        .iter()
        .zip(&path.velocities)
        .map(|(a, v)| {
            let g = induced_metric(kernel, a)?;
            let v = DVector::from_column_slice(v);
            Ok((v.transpose() * g * &v)[(0, 0)])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrosscheckReport {
    pub schedule: Vec<f64>,
    /// Mollified `‖δφ‖²_H`, indexed `[step][L]`.
    pub mollified: Vec<Vec<f64>>,
    /// Richardson extrapolation in `1/L²` from the two largest `L`.
    pub extrapolated: Vec<f64>,
    pub quadratic_form: Vec<f64>,
    /// Largest `|extrapolated − q| / max(|q|, 1e−300)` over steps with `q ≠ 0`,
    /// absolute where `q = 0`.
    pub max_error: f64,
    /// Observed order of `|mollified − q|` in `1/L` from the last two `L`, at
    /// the step with the largest `|q|`; `None` when every `q` vanishes.
    pub order: Option<f64>,
}

/// Compares the mollified-delta value of `‖d/dt δ_{a(t)}‖²_H` with the
/// quadratic form `g_μν ȧ^μ ȧ^ν` for a product kernel. The one-dimensional
/// `axis_grid` is used along every axis.
pub fn path_norm_crosscheck(
    kernel: &Kernel,
    path: &DeltaPath,
    axis_grid: &Arc<Grid>,
    schedule: &[f64],
) -> Result<CrosscheckReport> {
    if axis_grid.dim() != 1 {
        return Err(Error::InvalidGrid("cross-check axis grid must be one-dimensional".into()));
    }
    if schedule.len() < 2 {
        return Err(Error::InvalidArgument("L-schedule needs at least two entries".into()));
    }
    let n = path.dim();
    let xs: Vec<f64> = axis_grid.nodes().map(|x| x[0]).collect();
    let w = axis_grid.weights();
    // weighted per-axis kernel matrices w_i k(x_i, x_j) w_j
    let kw: Vec<DMatrix<f64>> = (0..n)
        .map(|mu| {
            let k = kernel.axis_factor(mu).ok_or_else(|| {
                Error::InvalidArgument(format!("kernel `{}` is not a product kernel", kernel.name()))
            })?;
            Ok(DMatrix::from_fn(xs.len(), xs.len(), |i, j| w[i] * k(xs[i], xs[j]) * w[j]))
        })
        .collect::<Result<_>>()?;
    let q = path_quadratic_form(kernel, path)?;
    let mut mollified = Vec::with_capacity(q.len());
    for (a, v) in path.points().iter().zip(path.velocities()) {
        let mut row = Vec::with_capacity(schedule.len());
        for &l in schedule {
            let mut f = Vec::with_capacity(n);
            let mut df = Vec::with_capacity(n);
            for mu in 0..n {
                let m = mollified_delta(axis_grid, &[a[mu]], l)?;
                let fv = DVector::from_iterator(xs.len(), m.values().iter().map(|z| z.re));
                // ∂f_L/∂x = −2L²(x − a) f_L
                let dv = DVector::from_iterator(
                    xs.len(),
                    fv.iter().zip(&xs).map(|(fi, x)| -2.0 * l * l * (x - a[mu]) * fi),
                );
                f.push(fv);
                df.push(dv);
            }
            // Σ_μν ȧ^μ ȧ^ν Π_α ∫∫k_α u_α v_α with u, v = ∂f or f per axis
            let mut total = 0.0;
            for mu in 0..n {
                for nu in 0..n {
                    let mut prod = v[mu] * v[nu];
                    for al in 0..n {
                        let left = if al == mu { &df[al] } else { &f[al] };
                        let right = if al == nu { &df[al] } else { &f[al] };
                        prod *= (left.transpose() * &kw[al] * right)[(0, 0)];
                    }
                    total += prod;
                }
            }
            row.push(total);
        }
        mollified.push(row);
    }
    let s = schedule.len();
    let (l1, l2) = (schedule[s - 2], schedule[s - 1]);
    let r = (l2 / l1).powi(2);
    let extrapolated: Vec<f64> =
        mollified.iter().map(|row| (r * row[s - 1] - row[s - 2]) / (r - 1.0)).collect();
    let mut max_error: f64 = 0.0;
    for (e, qv) in extrapolated.iter().zip(&q) {
        let err = if *qv == 0.0 { e.abs() } else { (e - qv).abs() / qv.abs() };
        max_error = max_error.max(err);
    }
    let peak = q
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .filter(|(_, v)| v.abs() > 0.0)
        .map(|(k, _)| k);
    let order = peak.map(|k| {
        let e1 = (mollified[k][s - 2] - q[k]).abs();
        let e2 = (mollified[k][s - 1] - q[k]).abs();
        (e1 / e2).ln() / (l2 / l1).ln()
    });
    Ok(CrosscheckReport {
        schedule: schedule.to_vec(),
        mollified,
        extrapolated,
        quadratic_form: q,
        max_error,
        order,
    })
}

#[derive(Debug, Clone)]
pub struct GramReport {
    pub matrix: DMatrix<f64>,
    pub min_eigenvalue: f64,
    pub min_distance: f64,
}

/// `Gram[i][j] = k(a_i, a_j)` for a finite delta set.
pub fn gram_deltas(kernel: &Kernel, points: &[Vec<f64>]) -> Result<GramReport> {
    let m = points.len();
    if m == 0 || m > MAX_GRAM {
        return Err(Error::InvalidArgument(format!(
            "Gram matrices take 1..={MAX_GRAM} points, got {m}"
        )));
    }
    let mut min_distance = f64::INFINITY;
    for i in 0..m {
        for j in i + 1..m {
            let d = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            min_distance = min_distance.min(d);
        }
    }
    if min_distance == 0.0 {
        return Err(Error::InvalidArgument("duplicate points make the Gram matrix singular".into()));
    }
    let mut g = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            g[(i, j)] = kernel.eval(&points[i], &points[j])?.re;
        }
    }
    let sym = (&g + g.transpose()) * 0.5;
    let min_eigenvalue = sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GramReport { matrix: g, min_eigenvalue, min_distance })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuityReport {
    /// `‖λδ_a − λ_kδ_{a_k}‖²_H` per sequence element.
    pub distances: Vec<f64>,
    /// Slope of `log distance` against `log |a − a_k|` between the last two
    /// elements, when both moved.
    pub order: Option<f64>,
}

/// `‖λδ_a − λ_kδ_{a_k}‖²_H = λ²k(a,a) − λλ_k(k(a,a_k) + k(a_k,a)) + λ_k²k(a_k,a_k)`.
pub fn linear_structure_continuity(
    kernel: &Kernel,
    a: &[f64],
    lambda: f64,
    seq: &[(Vec<f64>, f64)],
) -> Result<ContinuityReport> {
    let kaa = kernel.eval(a, a)?.re;
    let mut distances = Vec::with_capacity(seq.len());
    let mut steps = Vec::with_capacity(seq.len());
    for (ak, lk) in seq {
        let d = lambda * lambda * kaa
            - lambda * lk * (kernel.eval(a, ak)?.re + kernel.eval(ak, a)?.re)
            + lk * lk * kernel.eval(ak, ak)?.re;
        distances.push(d);
        steps.push(a.iter().zip(ak).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt());
    }
    let n = distances.len();
    let order = (n >= 2 && steps[n - 1] > 0.0 && steps[n - 2] > 0.0 && distances[n - 1] > 0.0)
        .then(|| (distances[n - 2] / distances[n - 1]).ln() / (steps[n - 2] / steps[n - 1]).ln());
    Ok(ContinuityReport { distances, order })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleReport {
    pub index_zero: usize,
    pub index_two_pi: usize,
    /// Largest `|δ_0(φ) − δ_{2π}(φ)|` over periodic test functions.
    pub pairing_gap: f64,
    /// Induced metric of the chordal circle kernel at each node.
    pub metric: Vec<f64>,
    pub metric_spread: f64,
}

/// Gluing check for the circle: `δ(θ)` and `δ(θ − 2π)` coincide.
pub fn circle_embedding_check(grid: &Arc<Grid>) -> Result<CircleReport> {
    if grid.dim() != 1 || !grid.is_periodic() {
        return Err(Error::InvalidGrid("circle check needs a periodic line".into()));
    }
    let two_pi = grid.axes()[0].hi;
    let index_zero = grid.nearest_node(&[grid.axes()[0].lo])?;
    let index_two_pi = grid.nearest_node(&[two_pi])?;
    let d0 = grid_delta(grid, index_zero)?;
    let d1 = grid_delta(grid, index_two_pi)?;
    let mut pairing_gap: f64 = 0.0;
    for j in 1..=10 {
        let phi = sample_real(grid, |x| (j as f64 * x[0]).sin() + (x[0] * (j - 1) as f64).cos())?;
        let gap = (pairing(&d0, &phi)? - pairing(&d1, &phi)?).norm();
        pairing_gap = pairing_gap.max(gap);
    }
    let manifold = EmbeddedManifold::new(grid.clone(), Kernel::ChordalCircle)?;
    let metric: Vec<f64> = (0..grid.len()).map(|k| manifold.metric_at(k)[(0, 0)]).collect();
    Ok(CircleReport {
        index_zero,
        index_two_pi,
        pairing_gap,
        metric,
        metric_spread: manifold.metric_spread(),
    })
}

/// An analytic functional truncated at degree two,
/// `f(φ) = f₀ + ∫f₁φ + ∫∫f₂φφ`.
pub struct QuadraticFunctional<'a> {
    pub f0: f64,
    pub f1: &'a (dyn Fn(&[f64]) -> f64 + Sync),
    pub f2: Option<&'a (dyn Fn(&[f64], &[f64]) -> f64 + Sync)>,
}

impl QuadraticFunctional<'_> {
    /// `f(δ_a) = f₀ + f₁(a) + f₂(a, a)`.
    pub fn on_delta(&self, a: &[f64]) -> f64 {
        self.f0 + (self.f1)(a) + self.f2.map_or(0.0, |f2| f2(a, a))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalReport {
    pub times: Vec<f64>,
    /// `∂f/∂a^μ · ȧ^μ` on the parameter side.
    pub chain_rule: Vec<f64>,
    /// `d/dt f(mollified δ_{a(t)})`, Richardson-extrapolated in `1/L²`.
    pub mollified: Vec<f64>,
    pub max_gap: f64,
}

/// Mollifier mass beyond this many widths `1/L` is dropped.
const WINDOW: f64 = 5.0;

/// `f(f_L(· − a))` by quadrature over the nodes within `WINDOW/L` of `a`.
fn mollified_value(
    func: &QuadraticFunctional<'_>,
    grid: &Arc<Grid>,
    a: &[f64],
    l: f64,
) -> Result<f64> {
    // validates resolution
    mollified_delta(grid, a, l).map(|_| ())?;
    let n = grid.dim();
    let norm = (l / std::f64::consts::PI.sqrt()).powi(n as i32);
    let radius = WINDOW / l;
    let window: Vec<(usize, f64)> = grid
        .nodes()
        .enumerate()
        .filter_map(|(i, x)| {
            let r2: f64 = x.iter().zip(a).map(|(p, q)| (p - q) * (p - q)).sum();
            (r2 <= radius * radius).then(|| (i, grid.weights()[i] * norm * (-l * l * r2).exp()))
        })
        .collect();
    let mut value = func.f0;
    for &(i, m) in &window {
        value += (func.f1)(grid.node(i)) * m;
    }
    if let Some(f2) = func.f2 {
        for &(i, mi) in &window {
            for &(j, mj) in &window {
                value += f2(grid.node(i), grid.node(j)) * mi * mj;
            }
        }
    }
    Ok(value)
}

/// `d/dt f(δ_{a(t)})` two ways: chain rule on the parameter side (4th-order
/// gradient, step 1e−3) and central differences in `t` of the functional on
/// the mollified path, extrapolated over `schedule`.
pub fn directional_derivative_check(
    func: &QuadraticFunctional<'_>,
    path: &DeltaPath,
    grid: &Arc<Grid>,
    schedule: &[f64],
) -> Result<DirectionalReport> {
    path.check_inside(grid)?;
    if schedule.len() < 2 {
        return Err(Error::InvalidArgument("L-schedule needs at least two entries".into()));
    }
    let h = VELOCITY_STEP;
    let mut chain_rule = Vec::new();
    let mut mollified = Vec::new();
    for (k, &t) in path.times().iter().enumerate() {
        let a = &path.points()[k];
        let v = &path.velocities()[k];
        let mut dfdt = 0.0;
        for mu in 0..path.dim() {
            let shifted = |s: f64| {
                let mut p = a.clone();
                p[mu] += s;
                func.on_delta(&p)
            };
            let grad = (-shifted(2.0 * h) + 8.0 * shifted(h) - 8.0 * shifted(-h) + shifted(-2.0 * h))
                / (12.0 * h);
            dfdt += grad * v[mu];
        }
        chain_rule.push(dfdt);

        let mut per_l = Vec::with_capacity(schedule.len());
        for &l in schedule {
            let at = |s: f64| mollified_value(func, grid, &path.at(t + s), l);
            let d = (-at(2.0 * h)? + 8.0 * at(h)? - 8.0 * at(-h)? + at(-2.0 * h)?) / (12.0 * h);
            per_l.push(d);
        }
        let s = schedule.len();
        let r = (schedule[s - 1] / schedule[s - 2]).powi(2);
        mollified.push((r * per_l[s - 1] - per_l[s - 2]) / (r - 1.0));
    }
    let max_gap = chain_rule
        .iter()
        .zip(&mollified)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(DirectionalReport { times: path.times().to_vec(), chain_rule, mollified, max_gap })
}

/// Sign pattern of `η(v, v)` over a pencil of unit directions.
pub fn quadratic_form_signs(kernel: &Kernel, a: &[f64], directions: usize) -> Result<(usize, usize)> {
    if a.len() != 2 {
        return Err(Error::DimensionMismatch("direction pencil is two-dimensional".into()));
    }
    let g = induced_metric(kernel, a)?;
    let mut pos = 0;
    let mut neg = 0;
    for k in 0..directions {
        let th = std::f64::consts::PI * (k as f64 + 0.5) / directions as f64;
        let v = DVector::from_column_slice(&[th.cos(), th.sin()]);
        let q = (v.transpose() * &g * &v)[(0, 0)];
        if q > 0.0 {
            pos += 1;
        } else if q < 0.0 {
            neg += 1;
        }
    }
    Ok((pos, neg))
}
