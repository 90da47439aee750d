//! Property tests for the numeric kernels: scaling laws, homogeneity,
//! envelope containment and special-function identities under random
//! parameters.

use proptest::prelude::*;
use thinshell_core::bodies::StarBodyOracle;
use thinshell_core::quadrature::adaptive;
use thinshell_core::radial1d::{kq_radius_1d, radial_moment, RadialFunction};
use thinshell_core::special::log_gamma;
use thinshell_core::stats::{clopper_pearson, log_power_mean};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn radial_moment_scales_as_s_to_q_plus_1(s in 0.3f64..4.0, q in 0.0f64..5.0) {
        let base = RadialFunction::exponential();
        let scaled = RadialFunction::new(move |t: f64| (-t / s).exp(), (0.0, f64::INFINITY), true, None);
        let m0 = radial_moment(&base, q, 1e-11).unwrap().value;
        let m1 = radial_moment(&scaled, q, 1e-11).unwrap().value;
        let want = s.powf(q + 1.0) * m0;
        prop_assert!((m1 - want).abs() < 1e-7 * want.max(1e-12));
    }

    #[test]
    fn radial_moment_is_linear(a in 0.1f64..3.0, b in 0.1f64..3.0) {
        let w1 = RadialFunction::exponential();
        let w2 = RadialFunction::indicator(0.0, 1.0);
        let combo = RadialFunction::new(
            move |t: f64| a * (-t).exp() + b * f64::from(u8::from(t <= 1.0)),
            (0.0, f64::INFINITY),
            false,
            None,
        );
        let q = 2.0;
        let m = radial_moment(&combo, q, 1e-11).unwrap().value;
        let want = a * radial_moment(&w1, q, 1e-11).unwrap().value
            + b * radial_moment(&w2, q, 1e-11).unwrap().value;
        prop_assert!((m - want).abs() < 1e-8 * want.max(1e-12));
    }

    #[test]
    fn indicator_interval_is_fixed_point(a in 0.05f64..2.0, b in 0.05f64..2.0, qi in 1usize..8) {
        let q = qi as f64;
        let w = RadialFunction::indicator(-a, b);
        let rp = kq_radius_1d(&w, q, true).unwrap();
        let rm = kq_radius_1d(&w, q, false).unwrap();
        prop_assert!((rp - b).abs() < 1e-9 * b.max(1.0));
        prop_assert!((rm - a).abs() < 1e-9 * a.max(1.0));
    }

    #[test]
    fn oracle_gauge_is_positively_homogeneous(scale in 0.1f64..20.0, x in -3.0f64..3.0, y in -3.0f64..3.0) {
        prop_assume!(x.abs() + y.abs() > 0.1);
        let ell = StarBodyOracle::ellipsoid(vec![2.0, 0.7]);
        let v = [x, y];
        let sv = [scale * x, scale * y];
        let (n1, _) = ell.norm(&v).unwrap();
        let (n2, _) = ell.norm(&sv).unwrap();
        prop_assert!((n2 - scale * n1).abs() < 1e-10 * n2.max(1.0));
    }

    #[test]
    fn clopper_pearson_contains_the_point_estimate(k in 0u64..200, extra in 1u64..400) {
        let n = k + extra;
        let (lo, hi) = clopper_pearson(k, n, 0.99);
        let p_hat = k as f64 / n as f64;
        prop_assert!(lo <= p_hat + 1e-12 && p_hat <= hi + 1e-12);
        // wider confidence, wider interval
        let (lo2, hi2) = clopper_pearson(k, n, 0.999);
        prop_assert!(lo2 <= lo + 1e-12 && hi <= hi2 + 1e-12);
    }

    #[test]
    fn power_mean_monotone_in_p(p1 in -4.0f64..8.0, p2 in -4.0f64..8.0) {
        let logs: Vec<f64> = (1..60).map(|i| (i as f64 * 0.11).ln()).collect();
        let (a, b) = if p1 <= p2 { (p1, p2) } else { (p2, p1) };
        prop_assert!(log_power_mean(&logs, a) <= log_power_mean(&logs, b) + 1e-12);
    }

    #[test]
    fn log_gamma_recurrence(x in 0.51f64..250.0) {
        // Gamma(x+1) = x Gamma(x)
        let lhs = log_gamma(x + 1.0);
        let rhs = log_gamma(x) + x.ln();
        prop_assert!((lhs - rhs).abs() < 1e-11 * lhs.abs().max(1.0));
    }

    #[test]
    fn quadrature_tolerance_is_honored(k in 1.0f64..30.0) {
        let q = adaptive(move |x: f64| (k * x).sin().abs(), 0.0, 2.0, 1e-9, 1e-13).unwrap();
        let fine = adaptive(move |x: f64| (k * x).sin().abs(), 0.0, 2.0, 1e-13, 1e-15).unwrap();
        prop_assert!((q.value - fine.value).abs() <= q.abs_error_estimate.max(1e-9));
    }
}
