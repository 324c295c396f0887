use std::sync::Arc;

use proptest::prelude::*;

use ricci_lab::flow::{exact_flow, ExactFlow, Flow};
use ricci_lab::lgeo::{solve_bvp, BvpSettings};
use ricci_lab::monitor::volume_series;
use ricci_lab::numerics::quad::simpson_uniform;
use ricci_lab::splice::{junction_times, splice, BreatherSpec, Diffeo, CERT_TOL};

fn flat() -> ricci_lab::FlowHistory {
    exact_flow(ExactFlow::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap()
}

fn sphere_splice() -> ricci_lab::SplicedFlow {
    let g0 = Arc::new(exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0 }, 0.0, 1.0).unwrap());
    splice(BreatherSpec::new(g0, 0.5, Diffeo::Identity, CERT_TOL).unwrap(), 12).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn flat_reduced_distance_is_quadratic(r in 0.0..3.0_f64, tau in 0.2..3.0_f64) {
        let l = solve_bvp(&flat(), r, tau, &BvpSettings::default()).unwrap().l();
        prop_assert!((l - r * r / (4.0 * tau)).abs() <= 1e-8 * (1.0 + l));
    }

    #[test]
    fn sphere_splice_follows_the_scale_law(tau in 0.0..4000.0_f64) {
        let sp = sphere_splice();
        let s = sp.snapshot(tau).unwrap().scale;
        prop_assert!((s / (4.0 * (tau + 1.0)) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn junction_times_are_sandwiched(alpha in 0.05..0.95_f64, i_max in 1usize..20) {
        let t = junction_times(alpha, i_max).unwrap();
        for (i, &ti) in t.iter().enumerate() {
            let lo = alpha.powi(-(i as i32));
            prop_assert!(ti >= lo * (1.0 - 1e-12) && ti <= lo / (1.0 - alpha) * (1.0 + 1e-12));
        }
        prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn diffeo_powers_invert(r in 0.0..10.0_f64, lambda in 0.1..0.9_f64, k in -6i32..6) {
        let phi = Diffeo::RadialScaling(lambda);
        prop_assert!((phi.apply(phi.apply(r, k), -k) - r).abs() <= 1e-12 * (1.0 + r));
    }

    #[test]
    fn simpson_integrates_cubics(a in -2.0..2.0_f64, b in -2.0..2.0_f64, m in 1usize..20) {
        let n = 2 * m;
        let h = 1.0 / n as f64;
        let f = |x: f64| a * x * x * x + b * x + 1.0;
        let vals: Vec<f64> = (0..=n).map(|k| f(k as f64 * h)).collect();
        prop_assert!((simpson_uniform(&vals, h) - (a / 4.0 + b / 2.0 + 1.0)).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn sphere_reduced_volume_stays_below_one(tau in 0.3..3.0_f64) {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0 }, 0.0, 4.0).unwrap();
        let v = volume_series(&f, &[tau], 65, &BvpSettings::default()).unwrap().samples[0].v;
        prop_assert!(v > 0.0 && v <= 1.0 + 1e-6);
    }
}
