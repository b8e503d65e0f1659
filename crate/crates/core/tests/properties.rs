use approx::assert_relative_eq;
use nalgebra::DVector;
use proptest::prelude::*;

use funcoord::expr::Expression;
use funcoord::geometry::{gram_deltas, induced_metric};
use funcoord::kernels::{gram_closed_form, Kernel};
use funcoord::projective::geodesic_residual;
use funcoord::report::format_float;
use funcoord::rng;
use funcoord::tolerances::{Bound, Tolerances, TOLERANCES};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_floats_round_trip(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_float(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn affine_expressions_evaluate(a in -1e3f64..1e3, b in -1e3f64..1e3, x in -10f64..10.0) {
        let e = Expression::parse(&format!("({a})*x + ({b})"), &["x"]).unwrap();
        assert_relative_eq!(e.eval(&[x]), a * x + b, epsilon = 1e-9, max_relative = 1e-12);
    }

    #[test]
    fn gram_matrix_is_the_closed_form_quadratic_form(
        pts in prop::collection::vec(prop::collection::vec(-3f64..3.0, 2), 2..6),
        lambdas in prop::collection::vec(-2f64..2.0, 6),
    ) {
        let k = Kernel::gauss_metric();
        let distinct = pts.iter().enumerate().all(|(i, p)| {
            pts[..i].iter().all(|q| p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>() > 1e-3)
        });
        prop_assume!(distinct);
        let lam = &lambdas[..pts.len()];
        let g = gram_deltas(&k, &pts).unwrap();
        let l = DVector::from_column_slice(lam);
        let via_matrix = (l.transpose() * &g.matrix * &l)[(0, 0)];
        let closed = gram_closed_form(&k, lam, &pts).unwrap();
        assert_relative_eq!(via_matrix, closed, epsilon = 1e-12, max_relative = 1e-12);
        prop_assert!(g.min_eigenvalue > 0.0);
    }

    #[test]
    fn scaled_gaussian_metric_is_flat(scale in 0.1f64..5.0, x in -3f64..3.0, y in -3f64..3.0) {
        let g = induced_metric(&Kernel::GaussMetric { scale }, &[x, y]).unwrap();
        assert_relative_eq!(g[(0, 0)], scale, max_relative = 1e-12);
        assert_relative_eq!(g[(1, 1)], scale, max_relative = 1e-12);
        assert_relative_eq!(g[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn schrodinger_flow_is_geodesic_for_any_seed(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng::seeded(seed);
        let a = rng::hermitian_invertible(&mut r, n, 0.5, 2.0);
        let phi = rng::unit_vector(&mut r, n);
        let res = geodesic_residual(&a, &phi, &[0.0, 0.7, 2.3, 5.0]).unwrap();
        prop_assert!(res < 1e-8, "{}", res);
    }

    #[test]
    fn tolerance_bounds_are_monotone(idx in 0..TOLERANCES.len(), m in -1.0f64..1.0, d in 0.0f64..1.0) {
        let spec = &TOLERANCES[idx];
        let mut tol = Tolerances::new();
        tol.set(spec.name, 0.0).unwrap();
        let lo = tol.check(spec.name, m).passed;
        let hi = tol.check(spec.name, m + d).passed;
        match spec.bound {
            Bound::Below => prop_assert!(!hi || lo),
            Bound::Above | Bound::AtLeast => prop_assert!(!lo || hi),
        }
    }
}
