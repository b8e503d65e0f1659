//! Experiment runners behind the CLI subcommands. Every runner is a pure
//! function of its configuration: it seeds its own generator, so two runs
//! with the same seed produce byte-identical tables.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::config::{
    parse_config_for, tolerance_location, ConfigError, Experiment, ExperimentConfig, GridSpec, InitialState,
    OperatorSpec,
};
use crate::error::{Error, Result};
use crate::geometry::{gram_deltas, induced_metric, path_norm_crosscheck, path_quadratic_form, DeltaPath};
use crate::grid::{derivative_op, grid_delta, multiplication_op, pairing, Grid, SampledFunction, Side};
use crate::kernels::{gram_closed_form, CustomKernel, Kernel};
use crate::linalg::{self, c, I};
use crate::linop::LinOp;
use crate::projective::{
    geodesic_integrate, geodesic_residual, levi_civita_residual, GeodesicState, ProjectiveMetric,
    SchrodingerFlow,
};
use crate::report::{Cell, CriterionOutcome, ExperimentReport, Table};
use crate::rng::{self, SeededRng};
use crate::spaces::{dual_metric_identity, dual_space_from_transform, l2_space, CoordinateSpace, Provenance};
use crate::spectral::{
    clustered_spectrum, generalized_eigs, isometry_defect, metric_from_unbounded, proper_basis,
    verify_proper_basis_orthogonality,
};
use crate::tolerances::Tolerances;
use crate::transforms::{
    boundary_vanishing_bank, conjugate_operator, intertwining_residual, product_noninvariance_demo,
    pushforward_metric, separable_intertwiner, verify_derivative_preservation, FourierPair, Transform,
};

/// Resolves the configuration of one run: the file (if any), then `seed`,
/// then `NAME=VALUE` tolerance overrides, each layer winning over the last.
/// Unknown tolerance names in the file are reported at their line and column.
pub fn configure(
    experiment: Experiment,
    config_text: Option<&str>,
    seed: Option<u64>,
    tolerance_args: &[String],
) -> Result<(ExperimentConfig, Tolerances)> {
    let mut tol = Tolerances::new();
    let mut config = match config_text {
        None => ExperimentConfig::defaults(experiment),
        Some(text) => {
            let config = parse_config_for(text, Some(experiment))?;
            for (name, value) in &config.tolerances {
                if let Err(e) = tol.set(name, *value) {
                    let (line, column) = tolerance_location(text, name).unwrap_or((0, 0));
                    return Err(ConfigError { line, column, message: e.to_string() }.into());
                }
            }
            config
        }
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    for arg in tolerance_args {
        tol.set_from_arg(arg)?;
    }
    Ok((config, tol))
}

/// Runs one experiment. `repro` runs all five twice.
pub fn run(config: &ExperimentConfig, tol: &Tolerances) -> Result<ExperimentReport> {
    let (tables, criteria) = match config.experiment {
        Experiment::DualMetric => dual_metric(config, tol)?,
        Experiment::Eigen => eigen(config, tol)?,
        Experiment::TransformCheck => transform_check(config, tol)?,
        Experiment::Embed => embed(config, tol)?,
        Experiment::Geodesic => geodesic(config, tol)?,
        Experiment::Repro => return repro(config.seed, tol),
    };
    Ok(ExperimentReport {
        experiment: config.experiment.name().into(),
        seed: config.seed,
        tables,
        criteria,
        tolerance_overrides: tol.overrides().clone(),
    })
}

type Outcome = (Vec<Table>, Vec<CriterionOutcome>);

const SUITE: [Experiment; 5] = [
    Experiment::DualMetric,
    Experiment::Eigen,
    Experiment::TransformCheck,
    Experiment::Embed,
    Experiment::Geodesic,
];

/// All experiments with their default setup, then a second pass compared
/// byte for byte.
pub fn repro(seed: u64, tol: &Tolerances) -> Result<ExperimentReport> {
    let pass = || -> Result<Vec<ExperimentReport>> {
        SUITE
            .iter()
            .map(|&e| {
                let mut cfg = ExperimentConfig::defaults(e);
                cfg.seed = seed;
                run(&cfg, tol)
            })
            .collect()
    };
    let first = pass()?;
    let second = pass()?;
    let mut compare = Table::new("repro_determinism", &["table", "bytes", "identical"]);
    let mut mismatches = 0usize;
    for (a, b) in first.iter().zip(&second) {
        if a.tables.len() != b.tables.len() {
            mismatches += a.tables.len().max(b.tables.len());
            continue;
        }
        for (ta, tb) in a.tables.iter().zip(&b.tables) {
            let (ba, bb) = (ta.to_csv()?, tb.to_csv()?);
            let same = ta.name == tb.name && ba == bb;
            if !same {
                mismatches += 1;
            }
            compare.push(vec![ta.name.clone().into(), ba.len().into(), (same as usize).into()]);
        }
    }
    let mut tables = Vec::new();
    let mut criteria = Vec::new();
    for rep in first {
        tables.extend(rep.tables);
        criteria.extend(rep.criteria);
    }
    tables.push(compare);
    criteria.push(CriterionOutcome::new(12, vec![tol.check("csv_mismatch", mismatches as f64)]));
    criteria.sort_by_key(|c| c.id);
    Ok(ExperimentReport {
        experiment: Experiment::Repro.name().into(),
        seed,
        tables,
        criteria,
        tolerance_overrides: tol.overrides().clone(),
    })
}

fn line_grid(spec: &Option<GridSpec>, lo: f64, hi: f64, points: usize, periodic: bool) -> Result<Arc<Grid>> {
    match spec {
        Some(g) => Grid::line(g.lo, g.hi, g.points, g.periodic),
        None => Grid::line(lo, hi, points, periodic),
    }
}

fn random_function(grid: &Arc<Grid>, r: &mut SeededRng, side: Side) -> Result<SampledFunction> {
    SampledFunction::new(grid.clone(), rng::complex_vector(r, grid.len()), side)
}

fn quantity_table(name: &str, rows: &[(&str, f64)]) -> Table {
    let mut t = Table::new(name, &["quantity", "value"]);
    for (q, v) in rows {
        t.push(vec![(*q).into(), (*v).into()]);
    }
    t
}

fn rel_gap(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

fn kernel_from_config(config: &ExperimentConfig, fallback: Kernel) -> Result<Kernel> {
    match &config.kernel {
        Some(k) => Kernel::from_name(&k.name, &k.signature, k.scale),
        None => Ok(fallback),
    }
}

fn dual_metric(config: &ExperimentConfig, tol: &Tolerances) -> Result<Outcome> {
    let grid = line_grid(&config.grid, -6.0, 6.0, 129, false)?;
    let rho = kernel_from_config(config, Kernel::GaussRho)?;
    let metric = Kernel::gauss_metric();
    let ax = grid.axes()[0];

    // deltas in the dual space of ρ on a coarse grid, where its form is
    // numerically positive-definite
    let coarse = Grid::line(ax.lo, ax.hi, config.delta_points, false)?;
    let space = dual_space_from_transform(&rho.assemble(&coarse, &coarse)?)?;
    let node = |a: f64| coarse.nearest_node(&[a]);
    let i0 = node(0.0)?;
    let d0 = grid_delta(&coarse, i0)?;
    let norm0 = space.inner(&d0, &d0)?.re;
    let a = coarse.node(i0)[0];

    let mut table = Table::new(
        "dual-metric_delta_inner_products",
        &["a", "b", "grid_value", "closed_form_value", "expected", "grid_error", "closed_form_error"],
    );
    let (mut grid_err, mut closed_err) = (0.0f64, 0.0f64);
    for target in [0.0, 1.0, 2.0, 4.0] {
        let ib = node(target)?;
        let b = coarse.node(ib)[0];
        let expected = (-(a - b) * (a - b) / 2.0).exp();
        let on_grid = space.inner(&d0, &grid_delta(&coarse, ib)?)?.re / norm0;
        // polarization of closed-form norms
        let pts = [vec![a], vec![b]];
        let plus = gram_closed_form(&metric, &[1.0, 1.0], &pts)?;
        let minus = gram_closed_form(&metric, &[1.0, -1.0], &pts)?;
        let closed = (plus - minus) / 4.0;
        let (ge, ce) = ((on_grid - expected).abs(), (closed - expected).abs());
        grid_err = grid_err.max(ge);
        closed_err = closed_err.max(ce);
        table.push(vec![a.into(), b.into(), on_grid.into(), closed.into(), expected.into(), ge.into(), ce.into()]);
    }

    let rep = dual_metric_identity(&rho, &metric, &grid, config.pad)?;
    let summary = quantity_table(
        "dual-metric_dual_metric",
        &[
            ("points", ax.points as f64),
            ("pad", config.pad),
            ("delta_norm", norm0),
            ("deviation", rep.deviation),
            ("scalar_re", rep.scalar.re),
            ("scalar_im", rep.scalar.im),
            ("expected_scalar", (PI / 2.0).sqrt()),
            ("truncated_deviation", rep.truncated_deviation),
        ],
    );
    Ok((
        vec![table, summary],
        vec![
            CriterionOutcome::new(
                1,
                vec![tol.check("delta_inner", grid_err), tol.check("delta_closed_form", closed_err)],
            ),
            CriterionOutcome::new(2, vec![tol.check("dual_metric", rep.deviation)]),
        ],
    ))
}

fn eigen(config: &ExperimentConfig, tol: &Tolerances) -> Result<Outcome> {
    let grid = line_grid(&config.grid, 0.0, 2.0 * PI, 64, true)?;
    let operator = config.operator.clone().unwrap_or(OperatorSpec::Momentum);
    let d = || -> Result<LinOp> { Ok(derivative_op(&grid, 0, 1)?.scaled(-I)) };
    let op = match &operator {
        OperatorSpec::Momentum => d()?,
        OperatorSpec::Multiplication(e) => multiplication_op(&grid, |x| c(e.eval(&[x[0]])))?,
    };
    let pairs = generalized_eigs(&op, &l2_space(&grid))?;
    let spectrum = clustered_spectrum(&pairs);
    let ax = grid.axes()[0];
    let momentum = matches!(operator, OperatorSpec::Momentum);
    // −iD on a period of length L has eigenvalues 2πp/L
    let unit = if momentum && grid.is_periodic() { 2.0 * PI / ax.length() } else { 1.0 };
    let window = config.max_abs as f64 + 0.5;

    let mut table = Table::new(
        "eigen_eigenvalues",
        &["eigenvalue", "imag", "multiplicity", "integer_gap", "max_residual"],
    );
    let (mut count, mut worst_gap) = (0usize, 0.0f64);
    for (k, &(value, mult)) in spectrum.iter().enumerate() {
        if value.re.abs() > window * unit {
            continue;
        }
        let residual = pairs.iter().filter(|p| p.cluster == k).map(|p| p.residual).fold(0.0, f64::max);
        let p = value.re / unit;
        let gap = (p - p.round()).abs() * unit + value.im.abs();
        count += 1;
        worst_gap = worst_gap.max(gap);
        table.push(vec![value.re.into(), value.im.into(), mult.into(), gap.into(), residual.into()]);
    }
    let mut tables = vec![table];
    let mut criteria = Vec::new();
    if momentum {
        let mut checks = Vec::new();
        let fourier_grid = grid.is_periodic()
            && ax.lo == 0.0
            && (ax.hi - 2.0 * PI).abs() < 1e-12
            && ax.points % 2 == 0;
        if fourier_grid {
            let fp = FourierPair::new(ax.points)?;
            let x = fp.x_grid().clone();
            let dx = derivative_op(&x, 0, 1)?.scaled(-I);
            let conj = fp.sigma.forward().compose(&dx.compose(fp.omega.forward())?)?;
            let mass = linalg::off_diagonal_mass(conj.matrix());
            tables.push(quantity_table("eigen_fourier", &[("off_diagonal_mass", mass)]));
            checks.push(tol.check("fourier_offdiag", mass));
        }
        let expected = 2 * config.max_abs + 1;
        checks.push(tol.check("eigen_integer", worst_gap));
        checks.push(tol.check("eigen_count_mismatch", (count as f64 - expected as f64).abs()));
        criteria.push(CriterionOutcome::new(3, checks));
    }
    Ok((tables, criteria))
}

/// Random positive-definite form `W^½ S W^½` on `grid`.
fn random_space(grid: &Arc<Grid>, r: &mut SeededRng) -> Result<CoordinateSpace> {
    let s = rng::spd(r, grid.len(), 0.5, 2.0);
    let w = grid.weight_matrix().map(|v| v.sqrt());
    CoordinateSpace::from_form(grid.clone(), Side::Primal, &w * s * &w, Provenance::L2)
}

fn transform_check(config: &ExperimentConfig, tol: &Tolerances) -> Result<Outcome> {
    let mut r = rng::seeded(config.seed);
    let n = config.n;
    if n < 2 {
        return Err(Error::InvalidArgument("transform-check needs n >= 2".into()));
    }

    // transformation laws under random changes of coordinates
    let g = Grid::line(0.0, 1.0, n, true)?;
    let space = random_space(&g, &mut r)?;
    let mut laws = Table::new(
        "transform-check_laws",
        &["trial", "condition", "scalar_gap", "inner_gap", "spectrum_gap"],
    );
    let (mut w_scalar, mut w_inner, mut w_spec) = (0.0f64, 0.0f64, 0.0f64);
    for trial in 0..config.trials {
        let omega = Transform::new(LinOp::endo(rng::invertible(&mut r, n, config.strength), g.clone(), Side::Primal)?)?;
        let f = random_function(&g, &mut r, Side::Dual)?;
        let phi = random_function(&g, &mut r, Side::Primal)?;
        let before = pairing(&f, &phi)?;
        let after = pairing(&omega.adjoint().apply(&f)?, &omega.inverse().apply(&phi)?)?;
        let scalar = rel_gap(after, before);

        let pushed = pushforward_metric(&omega, &space)?;
        let a = random_function(&g, &mut r, Side::Primal)?;
        let b = random_function(&g, &mut r, Side::Primal)?;
        let direct = space.inner(&omega.forward().apply(&a)?, &omega.forward().apply(&b)?)?;
        let inner = rel_gap(pushed.inner(&a, &b)?, direct);

        let h = LinOp::endo(rng::hermitian(&mut r, n), g.clone(), Side::Primal)?;
        let conj = conjugate_operator(&omega, &h)?;
        let spec = linalg::spectrum_distance(&linalg::eigenvalues(h.matrix())?, &linalg::eigenvalues(conj.matrix())?);

        w_scalar = w_scalar.max(scalar);
        w_inner = w_inner.max(inner);
        w_spec = w_spec.max(spec);
        laws.push(vec![trial.into(), omega.condition().into(), scalar.into(), inner.into(), spec.into()]);
    }

    // proper bases of operators Hermitian in a non-trivial metric
    let m = 2 * n;
    let pg = Grid::line(0.0, 1.0, m, true)?;
    let mut proper = Table::new(
        "transform-check_proper_basis",
        &["trial", "residual", "metric_offdiag", "min_eigenvalue", "max_eigenvalue"],
    );
    let (mut w_res, mut w_metric) = (0.0f64, 0.0f64);
    for trial in 0..config.trials.clamp(1, 5) {
        let s = random_space(&pg, &mut r)?;
        let h = rng::hermitian(&mut r, m);
        let a = LinOp::endo(linalg::inverse(s.form())? * h, pg.clone(), Side::Primal)?;
        let res = proper_basis(&a, &s)?;
        let orth = verify_proper_basis_orthogonality(&res, &s)?;
        let ev = res.eigenvalues();
        w_res = w_res.max(res.residual);
        w_metric = w_metric.max(orth.off_diagonal_mass);
        proper.push(vec![
            trial.into(),
            res.residual.into(),
            orth.off_diagonal_mass.into(),
            ev.first().copied().unwrap_or(f64::NAN).into(),
            ev.last().copied().unwrap_or(f64::NAN).into(),
        ]);
    }

    // metrics that turn unbounded operators into isometries
    let per = Grid::line(0.0, 2.0 * PI, 32, true)?;
    let shifted = derivative_op(&per, 0, 1)?.add(&LinOp::identity(&per, Side::Primal))?;
    let growth: Vec<f64> = (1..=per.len()).map(|k| k as f64).collect();
    let diag = LinOp::endo(linalg::real_diag(&growth), per.clone(), Side::Primal)?;
    let samples: Vec<SampledFunction> = (0..config.trials.max(1))
        .map(|_| random_function(&per, &mut r, Side::Primal))
        .collect::<Result<_>>()?;
    let mut iso = Table::new("transform-check_isometry", &["operator", "samples", "defect"]);
    let mut w_iso = 0.0f64;
    for (name, op) in [("D + 1", &shifted), ("diag(1..n)", &diag)] {
        let s = metric_from_unbounded(op)?;
        let defect = isometry_defect(op, &s, &samples)?;
        w_iso = w_iso.max(defect);
        iso.push(vec![name.into(), samples.len().into(), defect.into()]);
    }

    // locality
    let pres = verify_derivative_preservation(&Kernel::GaussRho, -8.0, 8.0, 257)?;
    let line = Grid::line(1.0, 3.0, 257, false)?;
    let sol = separable_intertwiner(&line, &|x| x, 1.0, 1.0)?;
    let xd = multiplication_op(&line, |x| c(x[0]))?.compose(&derivative_op(&line, 0, 1)?)?;
    let dd = derivative_op(&line, 0, 1)?;
    let xd_res = intertwining_residual(&xd, &sol.omega, &dd, &boundary_vanishing_bank(&line, 10)?)?;
    let product = product_noninvariance_demo(&|x| x)?;
    let locality = quantity_table(
        "transform-check_locality",
        &[
            ("gauss_rho_d", pres.residual_d),
            ("gauss_rho_d2", pres.residual_d2),
            ("gauss_rho_d_refined", pres.refined_d),
            ("xd_to_d", xd_res),
            ("xd_to_d_kernel", sol.residual),
            ("xd_to_d_rank", sol.rank as f64),
            ("product_x", product),
        ],
    );

    Ok((
        vec![laws, proper, iso, locality],
        vec![
            CriterionOutcome::new(
                4,
                vec![
                    tol.check("law_scalar", w_scalar),
                    tol.check("law_inner", w_inner),
                    tol.check("law_spectrum", w_spec),
                ],
            ),
            CriterionOutcome::new(
                5,
                vec![tol.check("proper_offdiag", w_res), tol.check("proper_metric_offdiag", w_metric)],
            ),
            CriterionOutcome::new(6, vec![tol.check("isometry", w_iso)]),
            CriterionOutcome::new(
                7,
                vec![
                    tol.check("locality_d", pres.residual_d),
                    tol.check("locality_d2", pres.residual_d2),
                    tol.check("xd_to_d", xd_res),
                    tol.check("product_control", product),
                ],
            ),
        ],
    ))
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

fn embed(config: &ExperimentConfig, tol: &Tolerances) -> Result<Outcome> {
    let mut r = rng::seeded(config.seed);
    let gauss = Kernel::gauss_metric();
    let custom = Kernel::Custom(
        CustomKernel::new("gauss_fd", |x: &[f64], y: &[f64]| {
            let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            c((-0.5 * r2).exp())
        })
        .smooth()
        .symmetric(),
    );
    let mut metrics = Table::new("embed_induced_metrics", &["case", "point", "max_deviation"]);
    let fmt_point = |a: &[f64]| a.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" ");
    let (mut analytic, mut fd, mut eta_dev) = (0.0f64, 0.0f64, 0.0f64);
    for a in [vec![0.0, 0.0, 0.0], vec![1.0, -2.0, 0.5], vec![3.0, 3.0, -3.0]] {
        let id = DMatrix::identity(3, 3);
        let ea = max_abs_diff(&induced_metric(&gauss, &a)?, &id);
        let ef = max_abs_diff(&induced_metric(&custom, &a)?, &id);
        analytic = analytic.max(ea);
        fd = fd.max(ef);
        metrics.push(vec!["gauss_metric".into(), fmt_point(&a).into(), ea.into()]);
        metrics.push(vec!["gauss_fd".into(), fmt_point(&a).into(), ef.into()]);
    }
    for sig in [vec![1i8, -1], vec![1, -1, -1, -1]] {
        let a: Vec<f64> = (0..sig.len()).map(|k| 0.1 * (k as f64 + 1.0)).collect();
        let eta = DMatrix::from_diagonal(&DVector::from_iterator(sig.len(), sig.iter().map(|&s| s as f64)));
        let e = max_abs_diff(&induced_metric(&Kernel::minkowski(&sig), &a)?, &eta);
        eta_dev = eta_dev.max(e);
        metrics.push(vec![format!("minkowski {sig:?}").into(), fmt_point(&a).into(), e.into()]);
    }
    let null = DeltaPath::new(2, -1.0, 1.0, 11, |t| vec![t, t])?;
    let null_form = path_quadratic_form(&Kernel::minkowski(&[1, -1]), &null)?
        .into_iter()
        .fold(0.0f64, |m, q| m.max(q.abs()));
    let circle = DeltaPath::new(2, 0.0, 2.0 * PI, 33, |t| vec![t.cos(), t.sin()])?;
    let unit_form = path_quadratic_form(&gauss, &circle)?
        .into_iter()
        .fold(0.0f64, |m, q| m.max((q - 1.0).abs()));
    metrics.push(vec!["minkowski null line".into(), "t -> (t, t)".into(), null_form.into()]);
    metrics.push(vec!["unit circle".into(), "t -> (cos t, sin t)".into(), unit_form.into()]);

    // mollified deltas against the quadratic form along an arc
    let axis = Grid::line(-6.0, 6.0, config.axis_points, false)?;
    let arc = DeltaPath::new(2, 0.0, 1.0, 5, |t| vec![t.cos(), t.sin()])?;
    let cross = path_norm_crosscheck(&gauss, &arc, &axis, &config.schedule)?;
    let mut header: Vec<String> = vec!["t".into(), "quadratic_form".into()];
    header.extend(config.schedule.iter().map(|l| format!("mollified_L{l}")));
    header.extend(["extrapolated".into(), "relative_error".into()]);
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut moll = Table::new("embed_mollifier", &header_refs);
    for (k, t) in arc.times().iter().enumerate() {
        let q = cross.quadratic_form[k];
        let e = cross.extrapolated[k];
        let mut row: Vec<Cell> = vec![(*t).into(), q.into()];
        row.extend(cross.mollified[k].iter().map(|&v| Cell::from(v)));
        row.push(e.into());
        row.push(((e - q).abs() / q.abs().max(f64::MIN_POSITIVE)).into());
        moll.push(row);
    }
    let order = cross.order.unwrap_or(f64::NAN);

    // Gram matrices of distinct deltas
    let mut gram = Table::new("embed_gram", &["trial", "points", "min_eigenvalue", "min_distance"]);
    let mut min_eig = f64::INFINITY;
    for trial in 0..config.trials {
        let m = 2 + trial % 7;
        let pts: Vec<Vec<f64>> =
            (0..m).map(|_| (0..3).map(|_| r.random_range(-3.0..3.0)).collect()).collect();
        let rep = gram_deltas(&gauss, &pts)?;
        min_eig = min_eig.min(rep.min_eigenvalue);
        gram.push(vec![trial.into(), m.into(), rep.min_eigenvalue.into(), rep.min_distance.into()]);
    }
    let separation = gram_deltas(&gauss, &[vec![0.0], vec![8.0]])?.matrix[(0, 1)];
    gram.push(vec!["separation 0..8".into(), Cell::Int(2), Cell::Num(f64::NAN), separation.into()]);

    let mut tables = vec![metrics, moll, gram];
    if let Some(path) = &config.path {
        tables.push(configured_path(config, path)?);
    }
    Ok((
        tables,
        vec![
            CriterionOutcome::new(
                8,
                vec![
                    tol.check("metric_analytic", analytic),
                    tol.check("metric_fd", fd),
                    tol.check("minkowski_eta", eta_dev),
                    tol.check("null_form", null_form),
                    tol.check("unit_speed_form", unit_form),
                ],
            ),
            CriterionOutcome::new(
                9,
                vec![tol.check("mollifier", cross.max_error), tol.check("mollifier_order", order)],
            ),
            CriterionOutcome::new(
                10,
                vec![tol.check("gram_min_eig", min_eig), tol.check("gram_separation", separation)],
            ),
        ],
    ))
}

/// Quadratic form of the configured kernel along the configured path.
fn configured_path(config: &ExperimentConfig, spec: &crate::config::PathSpec) -> Result<Table> {
    let kernel = kernel_from_config(config, Kernel::gauss_metric())?;
    let curve = Arc::new(spec.curve.clone());
    let dim = curve.len();
    let path = DeltaPath::new(dim, spec.t0, spec.t1, spec.steps, {
        let curve = curve.clone();
        move |t| curve.iter().map(|e| e.eval(&[t])).collect()
    })?;
    let q = path_quadratic_form(&kernel, &path)?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((0..dim).map(|k| format!("x{k}")));
    header.push("quadratic_form".into());
    let refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut table = Table::new("embed_path", &refs);
    for ((t, p), qv) in path.times().iter().zip(path.points()).zip(q) {
        let mut row: Vec<Cell> = vec![(*t).into()];
        row.extend(p.iter().map(|&v| Cell::from(v)));
        row.push(qv.into());
        table.push(row);
    }
    Ok(table)
}

struct FlowRun {
    residual: f64,
    flow_gap: f64,
    drift: f64,
    states: Vec<GeodesicState>,
    flow: SchrodingerFlow,
    a: DMatrix<Complex64>,
    phi0: DVector<Complex64>,
}

fn run_flow(
    a: DMatrix<Complex64>,
    phi0: DVector<Complex64>,
    taus: &[f64],
    tau_end: f64,
    steps: usize,
) -> Result<FlowRun> {
    let residual = geodesic_residual(&a, &phi0, taus)?;
    let flow = SchrodingerFlow::new(&a, &phi0)?;
    let family = ProjectiveMetric::from_operator(&a, phi0.clone())?;
    let start = GeodesicState::new(phi0.clone(), flow.at(0.0).velocity, 0.0)?;
    let states = geodesic_integrate(&start, &family, tau_end, steps)?;
    let last = states.last().expect("integration returns the initial state");
    let flow_gap = (&last.phi - flow.at(last.tau).phi).norm();
    let drift = states.iter().map(|s| s.norm_defect().max(s.tangency())).fold(0.0, f64::max);
    Ok(FlowRun { residual, flow_gap, drift, states, flow, a, phi0 })
}

fn geodesic(config: &ExperimentConfig, tol: &Tolerances) -> Result<Outcome> {
    let spec = &config.geodesic;
    let mut r = rng::seeded(config.seed);
    let taus: Vec<f64> = if spec.samples < 2 {
        vec![0.0]
    } else {
        (0..spec.samples).map(|k| spec.tau_max * k as f64 / (spec.samples - 1) as f64).collect()
    };

    let mut summary = Table::new(
        "geodesic_instances",
        &["n", "instance", "geodesic_residual", "flow_gap", "norm_drift"],
    );
    let (mut w_res, mut w_gap, mut w_drift) = (0.0f64, 0.0f64, 0.0f64);
    for n in [2usize, 4, 8, 16] {
        for inst in 0..5usize {
            let a = rng::hermitian_invertible(&mut r, n, 0.5, 2.0);
            let phi0 = rng::unit_vector(&mut r, n);
            let run = run_flow(a, phi0, &taus, spec.tau_end, spec.steps)?;
            w_res = w_res.max(run.residual);
            w_gap = w_gap.max(run.flow_gap);
            w_drift = w_drift.max(run.drift);
            summary.push(vec![n.into(), inst.into(), run.residual.into(), run.flow_gap.into(), run.drift.into()]);
        }
    }

    let mut lc = Table::new("geodesic_levi_civita", &["trial", "residual"]);
    let mut w_lc = 0.0f64;
    for trial in 0..5usize {
        let k = rng::spd(&mut r, 8, 0.5, 2.0);
        let metric = ProjectiveMetric::new(k, rng::unit_vector(&mut r, 8))?;
        let x = rng::complex_vector(&mut r, 8);
        let y = rng::complex_vector(&mut r, 8);
        let z = rng::complex_vector(&mut r, 8);
        let res = levi_civita_residual(&metric, &x, &y, &z)?.abs();
        w_lc = w_lc.max(res);
        lc.push(vec![trial.into(), res.into()]);
    }

    // the configured instance, step by step
    let n = spec.n;
    let a = match &spec.a_diag {
        Some(d) if d.len() != n => {
            return Err(Error::DimensionMismatch(format!("a_diag has {} entries for n = {n}", d.len())))
        }
        Some(d) => linalg::real_diag(d),
        None => rng::hermitian_invertible(&mut r, n, 0.5, 2.0),
    };
    let phi0 = match spec.phi0 {
        InitialState::Random => rng::unit_vector(&mut r, n),
        InitialState::Basis(k) if k < n => DVector::from_fn(n, |i, _| if i == k { c(1.0) } else { c(0.0) }),
        InitialState::Basis(k) => {
            return Err(Error::IndexOutOfRange { index: k, len: n });
        }
    };
    let run = run_flow(a, phi0, &taus, spec.tau_end, spec.steps)?;
    let mut path = Table::new(
        "geodesic_path",
        &["tau", "norm_defect", "tangency", "residual", "flow_gap"],
    );
    for s in &run.states {
        let residual = geodesic_residual(&run.a, &run.phi0, &[s.tau])?;
        let gap = (&s.phi - run.flow.at(s.tau).phi).norm();
        path.push(vec![s.tau.into(), s.norm_defect().into(), s.tangency().into(), residual.into(), gap.into()]);
    }
    w_res = w_res.max(run.residual);
    w_gap = w_gap.max(run.flow_gap);
    w_drift = w_drift.max(run.drift);

    Ok((
        vec![summary, lc, path],
        vec![CriterionOutcome::new(
            11,
            vec![
                tol.check("geodesic_residual", w_res),
                tol.check("geodesic_flow", w_gap),
                tol.check("norm_drift", w_drift),
                tol.check("levi_civita", w_lc),
            ],
        )],
    ))
}
