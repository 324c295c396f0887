//! Refinement behaviour of integrated warped-product histories.

use std::sync::Arc;

use ricci_lab::flow::{evolve_backward, flow_residual, Flow};
use ricci_lab::metric::{MetricSnapshot, ModelGeometry, Profile};
use ricci_lab::numerics::ode::StepControl;

const H: f64 = 1.0 / 16.0;
const TAU_END: f64 = 0.004;

fn bump() -> MetricSnapshot<f64> {
    let p = Profile::sample(3, H, 41, |r: f64| r + 0.1 * r.powi(3) * (-4.0 * r * r).exp()).unwrap();
    MetricSnapshot::new(0.0, ModelGeometry::RotSymPlane { profile: Arc::new(p) }, 1.0).unwrap()
}

/// Largest residual at the stored sample times and interior grid nodes.
fn node_residual(tol: f64) -> f64 {
    let f = evolve_backward(&bump(), TAU_END, StepControl::new(tol, tol)).unwrap();
    let taus: Vec<f64> = f.samples().unwrap().iter().map(|s| s.t).collect();
    let mut worst = 0.0_f64;
    for &t in &taus[1..taus.len() - 1] {
        for j in 1..20 {
            worst = worst.max(flow_residual(&f, t, j as f64 * H).unwrap().value);
        }
    }
    worst
}

#[test]
fn halving_the_tolerance_at_least_halves_the_residual() {
    let res: Vec<f64> = [4e-3, 2e-3, 1e-3, 5e-4].iter().map(|&t| node_residual(t)).collect();
    for w in res.windows(2) {
        assert!(w[0] / w[1] >= 2.0, "{res:?}");
    }
}

#[test]
fn flat_profile_is_a_fixed_point() {
    let p = Profile::sample(3, 1.0 / 32.0, 65, |r: f64| r).unwrap();
    let s = MetricSnapshot::new(0.0, ModelGeometry::RotSymPlane { profile: Arc::new(p) }, 1.0).unwrap();
    let f = evolve_backward(&s, 1.0, StepControl::new(1e-8, 1e-10)).unwrap();
    let g = f.snapshot(1.0).unwrap().radial(1.5).unwrap();
    assert!((g.psi - 1.5).abs() < 1e-12 && (g.phi - 1.0).abs() < 1e-12);
    assert!(flow_residual(&f, 0.5, 1.0).unwrap().value < 1e-12);
    assert_eq!(f.tau_range(), (0.0, 1.0));
}
