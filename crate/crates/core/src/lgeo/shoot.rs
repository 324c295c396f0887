//! Shooting the radial L-geodesic equation in `σ = √τ`.
//!
//! For a curve `β(σ) = γ(σ²)` along a ray through the pole of a warped
//! product `φ² dr² + ψ² g_S`, the Euler–Lagrange equation of
//! `∫ (2σ² R + ½ φ² ṙ²) dσ` under `∂_τ φ = φ Ric_rad` is
//!
//! `r̈ = 2σ² R_r / φ² − (φ_r/φ) ṙ² − 4σ Ric_rad ṙ`,
//!
//! with `r(0) = 0` and `ṙ(0) = 2v`, `v = lim √s γ'(s)`.

use crate::error::{LabError, Result};
use crate::flow::Flow;
use crate::lgeo::curve::{CurveSegment, LCurve};
use crate::numerics::ode::{Dopri, StepControl};
use crate::scalar::Real;

/// Numerical settings for shooting and boundary-value solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootSettings<T> {
    pub control: StepControl<T>,
    /// Output intervals in `σ` for recorded curves.
    pub samples: usize,
    /// Largest admissible `|v|` in metric units.
    pub v_guard: T,
}

impl<T: Real> Default for ShootSettings<T> {
    fn default() -> Self {
        Self { control: StepControl::new(T::lit(1e-11), T::lit(1e-13)), samples: 64, v_guard: T::lit(1e4) }
    }
}

/// One shot from the pole.
#[derive(Debug, Clone, PartialEq)]
pub struct LGeodesicResult<T> {
    /// Initial coordinate velocity `v = ṙ(0)/2`.
    pub v: T,
    pub tau_bar: T,
    pub curve: LCurve<T>,
    /// L-energy integrated alongside the trajectory.
    pub l_energy: T,
    /// Coordinate velocity `γ'(τ̄) = ṙ(σ̄)/(2σ̄)`.
    pub endpoint_velocity: T,
    /// Least L among the computed branches reaching the same target.
    pub minimal: bool,
    /// Endpoint map not increasing in `v` (suspected conjugate point).
    pub conjugate_flag: bool,
    /// Another branch reached the target with equal L.
    pub tie: bool,
}

impl<T: Real> LGeodesicResult<T> {
    /// Reduced distance `l = L / (2√τ̄)`.
    pub fn l(&self) -> T {
        self.l_energy / (T::lit(2.0) * self.tau_bar.sqrt())
    }

    pub fn endpoint(&self) -> T {
        self.curve.endpoint()
    }
}

fn rhs<T: Real, F: Flow<T> + ?Sized>(flow: &F, s: T, y: &[T; 3]) -> Result<[T; 3]> {
    let g = flow.radial(s * s, y[0]).map_err(|e| match e {
        LabError::Domain { .. } => LabError::Escape { sigma: s.as_f64() },
        other => other,
    })?;
    let two = T::lit(2.0);
    let p = y[1];
    let acc = two * s * s * g.d_scalar_dr / (g.phi * g.phi) - g.phi_r / g.phi * p * p - T::lit(4.0) * s * g.ric_rad * p;
    let lag = two * s * s * g.scalar + T::lit(0.5) * g.phi * g.phi * p * p;
    Ok([p, acc, lag])
}

/// Integrates from `σ = 0` to `√τ̄`; returns `(r, ṙ, L)` at the end.
pub fn shoot_endpoint<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    v: T,
    tau_bar: T,
    settings: &ShootSettings<T>,
) -> Result<[T; 3]> {
    check(flow, v, tau_bar, settings)?;
    let mut ode = Dopri::<T, 3>::new(settings.control);
    let mut f = |s: T, y: &[T; 3]| rhs(flow, s, y);
    ode.advance(&mut f, T::zero(), [T::zero(), T::lit(2.0) * v, T::zero()], tau_bar.sqrt())
}

fn check<T: Real, F: Flow<T> + ?Sized>(flow: &F, v: T, tau_bar: T, settings: &ShootSettings<T>) -> Result<()> {
    let (lo, hi) = flow.tau_range();
    if lo > T::zero() || tau_bar > hi || !(tau_bar > T::zero()) {
        return Err(LabError::TimeRange { tau: tau_bar.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let phi0 = flow.radial(T::zero(), T::zero())?.phi;
    if !(v.abs() * phi0 <= settings.v_guard) {
        return Err(LabError::Parameter(format!("|v| = {v} exceeds the blow-up guard")));
    }
    Ok(())
}

/// Full trajectory on a uniform `σ` grid.
pub fn shoot<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    v: T,
    tau_bar: T,
    settings: &ShootSettings<T>,
) -> Result<LGeodesicResult<T>> {
    check(flow, v, tau_bar, settings)?;
    let m = settings.samples.max(2);
    let sb = tau_bar.sqrt();
    let ds = sb / T::from_usize_lossy(m);
    let mut ode = Dopri::<T, 3>::new(settings.control);
    let mut f = |s: T, y: &[T; 3]| rhs(flow, s, y);
    let mut y = [T::zero(), T::lit(2.0) * v, T::zero()];
    let mut r = vec![y[0]];
    let mut dr = vec![y[1]];
    for k in 0..m {
        let a = ds * T::from_usize_lossy(k);
        let b = if k + 1 == m { sb } else { ds * T::from_usize_lossy(k + 1) };
        y = ode.advance(&mut f, a, y, b)?;
        r.push(y[0]);
        dr.push(y[1]);
    }
    let curve = LCurve::new(vec![CurveSegment { sigma0: T::zero(), dsigma: ds, r, dr }])?;
    Ok(LGeodesicResult {
        v,
        tau_bar,
        endpoint_velocity: y[1] / (T::lit(2.0) * sb),
        curve,
        l_energy: y[2],
        minimal: false,
        conjugate_flag: false,
        tie: false,
    })
}

/// Integrates the `τ`-form `r'' = R_r/(2φ²) − (φ_r/φ) r'² − 2 Ric_rad r' − r'/(2τ)`
/// from `(τ₀, r₀, r'₀)` to `τ₁`; returns `(r, r')` at `τ₁`.
pub fn integrate_tau_form<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    tau0: T,
    r0: T,
    dr0: T,
    tau1: T,
    control: StepControl<T>,
) -> Result<[T; 2]> {
    let mut ode = Dopri::<T, 2>::new(control);
    let mut f = |t: T, y: &[T; 2]| -> Result<[T; 2]> {
        let g = flow.radial(t, y[0])?;
        let p = y[1];
        let acc = g.d_scalar_dr / (T::lit(2.0) * g.phi * g.phi)
            - g.phi_r / g.phi * p * p
            - T::lit(2.0) * g.ric_rad * p
            - p / (T::lit(2.0) * t);
        Ok([p, acc])
    };
    ode.advance(&mut f, tau0, [r0, dr0], tau1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{exact_flow, ExactFlow};
    use crate::lgeo::curve::l_energy;

    #[test]
    fn flat_straight_line() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let (a, tb) = (3.0, 2.0_f64);
        let res = shoot(&f, a / (2.0 * tb.sqrt()), tb, &ShootSettings::default()).unwrap();
        assert!((res.endpoint() - a).abs() < 1e-12);
        assert!((res.l() - a * a / (4.0 * tb)).abs() < 1e-12);
        assert!((l_energy(&f, &res.curve).unwrap() - res.l_energy).abs() < 1e-10);
    }

    #[test]
    fn sphere_rest_curve() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 4.0).unwrap();
        let res = shoot(&f, 0.0, 2.0, &ShootSettings::default()).unwrap();
        assert!(res.curve.segments[0].r.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn sphere_closed_form_path() {
        // ρ'(τ) = C/(√τ s(τ)) integrates to ρ(τ) = C · 2 atan(√(τ/c)) / (a √c).
        let (n, c) = (3usize, 1.0_f64);
        let a = 2.0 * (n as f64 - 1.0);
        let f = exact_flow(ExactFlow::ShrinkingSphere { n, c }, 0.0, 4.0).unwrap();
        let v = 0.3;
        let res = shoot(&f, v, 2.0, &ShootSettings::default()).unwrap();
        // √s γ' → v at s = 0 gives C = v a c.
        let cc = v * a * c;
        let seg = &res.curve.segments[0];
        for k in 0..seg.r.len() {
            let t = seg.sigma(k).powi(2);
            let rho = cc * 2.0 * (t / c).sqrt().atan() / (a * c.sqrt());
            assert!((seg.r[k] - rho).abs() < 1e-6, "k = {k}");
        }
    }

    #[test]
    fn guard_and_escape() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 4.0).unwrap();
        let s = ShootSettings::default();
        assert!(shoot(&f, 1e9, 1.0, &s).is_err());
        assert!(matches!(shoot(&f, 50.0, 1.0, &s), Err(LabError::Escape { .. })));
    }
}
