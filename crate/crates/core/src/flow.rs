//! Backward Ricci flow `∂_τ g = 2 Ric`: histories, evolution, residuals.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::metric::{MetricSnapshot, ModelGeometry, OuterBoundary, Profile, RadialGeometry};
use crate::numerics::ode::{heun_euler, Sample, StepControl};
use crate::numerics::stencil::{hermite, lagrange3, one_sided, Side};
use crate::scalar::Real;

/// A backward Ricci flow on a time interval.
pub trait Flow<T: Real>: Send + Sync {
    fn dimension(&self) -> usize;

    /// Closed time interval `[τ_min, τ_max]` on which the flow is defined.
    fn tau_range(&self) -> (T, T);

    fn snapshot(&self, tau: T) -> Result<MetricSnapshot<T>>;

    /// Snapshot taken as the limit from one side; differs from
    /// [`snapshot`](Self::snapshot) only at interfaces of piecewise flows.
    fn snapshot_sided(&self, tau: T, _side: Side) -> Result<MetricSnapshot<T>> {
        self.snapshot(tau)
    }

    /// Largest interval around `tau` on which the flow is one smooth piece.
    fn smooth_window(&self, _tau: T) -> (T, T) {
        self.tau_range()
    }

    fn radial(&self, tau: T, r: T) -> Result<RadialGeometry<T>> {
        self.snapshot(tau)?.radial(r)
    }

    /// `τ`-derivatives of the orthonormal-frame log-metric components
    /// `(∂_τ log g_rr, ∂_τ log g_θθ)` at `(τ, r)`, plus a flag set when the
    /// estimate had to fall back to a one-sided stencil.
    fn log_metric_rate(&self, tau: T, r: T) -> Result<(T, T, bool)> {
        differenced_log_rate(self, tau, r)
    }
}

fn check_range<T: Real>(tau: T, (lo, hi): (T, T)) -> Result<()> {
    let slack = T::lit(1e-12) * hi.abs().max(T::one());
    if tau < lo - slack || tau > hi + slack || !tau.is_finite() {
        return Err(LabError::TimeRange { tau: tau.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
    }
    Ok(())
}

fn log_components<T: Real>(g: &RadialGeometry<T>) -> (T, Option<T>) {
    let rr = (g.phi * g.phi).ln();
    let tt = if g.psi.abs() > T::zero() { Some((g.psi * g.psi).ln()) } else { None };
    (rr, tt)
}

/// Fourth-order differencing of the accessor inside the smooth window.
fn differenced_log_rate<T: Real, F: Flow<T> + ?Sized>(flow: &F, tau: T, r: T) -> Result<(T, T, bool)> {
    let (lo, hi) = flow.smooth_window(tau);
    let base = T::lit(1e-3) * tau.abs().max(T::one());
    let room = (tau - lo).min(hi - tau);
    let eval = |t: T, side: Side| -> Result<(T, T)> {
        let g = flow.snapshot_sided(t, side)?.radial(r)?;
        let (a, b) = log_components(&g);
        Ok((a, b.unwrap_or(T::zero())))
    };
    if room >= T::lit(2.0) * base {
        let d = base;
        let f = |k: f64| eval(tau + T::lit(k) * d, Side::Right);
        let (m2, m1, p1, p2) = (f(-2.0)?, f(-1.0)?, f(1.0)?, f(2.0)?);
        let c = |a: T, b: T, c: T, e: T| (a - T::lit(8.0) * b + T::lit(8.0) * c - e) / (T::lit(12.0) * d);
        return Ok((c(m2.0, m1.0, p1.0, p2.0), c(m2.1, m1.1, p1.1, p2.1), false));
    }
    let (side, span) = if tau - lo >= hi - tau { (Side::Left, tau - lo) } else { (Side::Right, hi - tau) };
    let d = (span / T::lit(3.0)).min(base);
    if d <= T::zero() {
        return Err(LabError::Stencil { needed: 3, available: 1 });
    }
    let sign = if side == Side::Left { -T::one() } else { T::one() };
    let mut rr = Vec::with_capacity(3);
    let mut tt = Vec::with_capacity(3);
    for j in 0..3 {
        let (a, b) = eval(tau + sign * d * T::from_usize_lossy(j), side)?;
        rr.push(a);
        tt.push(b);
    }
    Ok((one_sided(&rr, d, 1, side)?, one_sided(&tt, d, 1, side)?, true))
}

/// Analytic model flows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExactFlow<T> {
    /// Static Euclidean `ℝⁿ`.
    GaussianStatic { n: usize },
    /// Round sphere with area scale `s(τ) = 2(n−1)(τ + c)`.
    ShrinkingSphere { n: usize, c: T },
}

impl<T: Real> ExactFlow<T> {
    pub fn dimension(&self) -> usize {
        match *self {
            Self::GaussianStatic { n } | Self::ShrinkingSphere { n, .. } => n,
        }
    }

    /// Scale `s(τ)` and its derivative.
    pub fn scale(&self, tau: T) -> (T, T) {
        match *self {
            Self::GaussianStatic { .. } => (T::one(), T::zero()),
            Self::ShrinkingSphere { n, c } => {
                let a = T::lit(2.0) * T::from_usize_lossy(n - 1);
                (a * (tau + c), a)
            }
        }
    }
}

/// Where a history came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Integrated,
    Spliced,
}

/// Integration metadata recorded with a history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryMeta {
    pub provenance: Provenance,
    pub model: String,
    pub n: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_step: Option<f64>,
    pub grid_spacing: Option<f64>,
    pub grid_nodes: Option<usize>,
    pub samples: usize,
}

#[derive(Debug, Clone)]
enum Body<T> {
    Exact(ExactFlow<T>),
    /// Homogeneous model with sampled scale `s(τ)`.
    Scale { geometry: ModelGeometry<T>, samples: Vec<Sample<T>> },
    /// Warped-product profile, state `[ψ_0..ψ_J, φ_0..φ_J]`.
    Profile { n: usize, h: T, slope: T, samples: Vec<Sample<T>> },
}

/// A backward Ricci flow given in closed form or by integrated samples.
#[derive(Debug, Clone)]
pub struct FlowHistory<T> {
    body: Body<T>,
    tau_min: T,
    tau_max: T,
    control: Option<StepControl<T>>,
}

/// Closed-form model flow on `[τ_min, τ_max]`.
pub fn exact_flow<T: Real>(kind: ExactFlow<T>, tau_min: T, tau_max: T) -> Result<FlowHistory<T>> {
    if kind.dimension() < 2 {
        return Err(LabError::Parameter(format!("dimension n = {} < 2", kind.dimension())));
    }
    if let ExactFlow::ShrinkingSphere { c, .. } = kind {
        if !(c > T::zero()) {
            return Err(LabError::Parameter(format!("sphere offset c = {c} must be positive")));
        }
    }
    if !(tau_min >= T::zero()) || !(tau_max > tau_min) {
        return Err(LabError::Parameter("time range must satisfy 0 <= τ_min < τ_max".into()));
    }
    Ok(FlowHistory { body: Body::Exact(kind), tau_min, tau_max, control: None })
}

/// Integrates `∂_τ g = 2 Ric` from `initial` to `tau_end`.
///
/// Homogeneous models reduce to the scale law `ds/dτ = 2(n−1)` (round) or
/// `ds/dτ = 0` (flat). Warped products use the method of lines on `(ψ, φ)`:
/// `∂_τ ψ = ψ Ric_tan`, `∂_τ φ = φ Ric_rad`, with `ψ_r(r_J)` frozen at its
/// initial value.
pub fn evolve_backward<T: Real>(
    initial: &MetricSnapshot<T>,
    tau_end: T,
    control: StepControl<T>,
) -> Result<FlowHistory<T>> {
    control.validate()?;
    let t0 = initial.tau;
    if !(tau_end > t0) {
        return Err(LabError::Parameter(format!("τ_end = {tau_end} must exceed initial τ = {t0}")));
    }
    let body = match &initial.geometry {
        ModelGeometry::HomogeneousFlat { .. } | ModelGeometry::HomogeneousRound { .. } => {
            let rate = match initial.geometry {
                ModelGeometry::HomogeneousRound { n } => T::lit(2.0) * T::from_usize_lossy(n - 1),
                _ => T::zero(),
            };
            let samples = heun_euler(
                |_, _| Ok(vec![rate]),
                t0,
                vec![initial.scale],
                tau_end,
                &control,
                |t, y| if y[0] > T::zero() { Ok(()) } else { Err(LabError::Degeneration { tau: t.as_f64() }) },
            )?;
            Body::Scale { geometry: initial.geometry.clone(), samples }
        }
        ModelGeometry::RotSymPlane { profile } => {
            let n = profile.dimension();
            let mu = initial.dilation;
            let sk = initial.scale.sqrt();
            let h = profile.spacing() / mu;
            let len = profile.nodes();
            let mut y0: Vec<T> = profile.psi().iter().map(|&p| sk * p).collect();
            y0.extend(profile.phi().iter().map(|&p| sk * mu * p));
            let slope = sk * mu * profile.derived().psi_x[len - 1];
            let boundary = OuterBoundary::FrozenSlope(slope);
            let rhs = |_t: T, y: &[T]| -> Result<Vec<T>> {
                let (psi, phi) = y.split_at(len);
                let d = crate::metric::derive_curvature(psi, phi, h, n, boundary)?;
                let mut out = Vec::with_capacity(2 * len);
                out.push(T::zero());
                out.extend((1..len).map(|j| psi[j] * d.ric_tan[j]));
                out.extend((0..len).map(|j| phi[j] * d.ric_rad[j]));
                Ok(out)
            };
            let guard = |t: T, y: &[T]| -> Result<()> {
                let (psi, phi) = y.split_at(len);
                let bad = psi[1..].iter().chain(phi).any(|&v| !(v > T::zero()) || !v.is_finite());
                if bad {
                    Err(LabError::Degeneration { tau: t.as_f64() })
                } else {
                    Ok(())
                }
            };
            let samples = heun_euler(rhs, t0, y0, tau_end, &control, guard)?;
            Body::Profile { n, h, slope, samples }
        }
    };
    Ok(FlowHistory { body, tau_min: t0, tau_max: tau_end, control: Some(control) })
}

impl<T: Real> FlowHistory<T> {
    pub fn provenance(&self) -> Provenance {
        match self.body {
            Body::Exact(_) => Provenance::ClosedForm,
            _ => Provenance::Integrated,
        }
    }

    pub fn exact(&self) -> Option<ExactFlow<T>> {
        match self.body {
            Body::Exact(e) => Some(e),
            _ => None,
        }
    }

    /// Stored samples of an integrated history.
    pub fn samples(&self) -> Option<&[Sample<T>]> {
        match &self.body {
            Body::Exact(_) => None,
            Body::Scale { samples, .. } | Body::Profile { samples, .. } => Some(samples),
        }
    }

    /// The same flow restricted to a shorter interval.
    pub fn restricted(&self, lo: T, hi: T) -> Result<Self> {
        check_range(lo, (self.tau_min, self.tau_max))?;
        check_range(hi, (self.tau_min, self.tau_max))?;
        if !(hi > lo) {
            return Err(LabError::Parameter("empty restriction".into()));
        }
        let mut out = self.clone();
        out.tau_min = lo;
        out.tau_max = hi;
        Ok(out)
    }

    fn locate(samples: &[Sample<T>], tau: T) -> usize {
        let k = samples.partition_point(|s| s.t <= tau);
        k.clamp(1, samples.len() - 1) - 1
    }

    fn state_at(samples: &[Sample<T>], tau: T) -> Vec<T> {
        let k = Self::locate(samples, tau);
        let (a, b) = (&samples[k], &samples[k + 1]);
        (0..a.y.len()).map(|i| hermite(tau, a.t, b.t, a.y[i], b.y[i], a.dy[i], b.dy[i])).collect()
    }

    fn snapshot_from_state(&self, tau: T, y: &[T]) -> Result<MetricSnapshot<T>> {
        match &self.body {
            Body::Scale { geometry, .. } => MetricSnapshot::new(tau, geometry.clone(), y[0]),
            Body::Profile { n, h, slope, .. } => {
                let len = y.len() / 2;
                let profile =
                    Profile::evolved(*n, *h, y[..len].to_vec(), y[len..].to_vec(), OuterBoundary::FrozenSlope(*slope))?;
                MetricSnapshot::new(tau, ModelGeometry::RotSymPlane { profile: Arc::new(profile) }, T::one())
            }
            Body::Exact(_) => unreachable!("closed-form histories have no state"),
        }
    }

    /// Metadata for the JSON sidecar.
    pub fn meta(&self) -> HistoryMeta {
        let (model, grid_spacing, grid_nodes, samples) = match &self.body {
            Body::Exact(ExactFlow::GaussianStatic { .. }) => ("gaussian_static".to_string(), None, None, 0),
            Body::Exact(ExactFlow::ShrinkingSphere { .. }) => ("shrinking_sphere".to_string(), None, None, 0),
            Body::Scale { geometry, samples } => {
                let m = if matches!(geometry, ModelGeometry::HomogeneousRound { .. }) { "round" } else { "flat" };
                (m.to_string(), None, None, samples.len())
            }
            Body::Profile { h, samples, .. } => {
                ("rotsym".to_string(), Some(h.as_f64()), Some(samples[0].y.len() / 2), samples.len())
            }
        };
        HistoryMeta {
            provenance: self.provenance(),
            model,
            n: self.dimension(),
            tau_min: self.tau_min.as_f64(),
            tau_max: self.tau_max.as_f64(),
            rtol: self.control.map(|c| c.rtol.as_f64()),
            atol: self.control.map(|c| c.atol.as_f64()),
            max_step: self.control.and_then(|c| c.max_step.map(|h| h.as_f64())),
            grid_spacing,
            grid_nodes,
            samples,
        }
    }

    /// CSV serialization: `tau,s` for homogeneous histories (closed forms are
    /// tabulated at `points` uniform times), `tau,r,psi,phi` for profiles.
    pub fn to_csv(&self, points: usize) -> String {
        let mut out = String::new();
        match &self.body {
            Body::Exact(e) => {
                out.push_str("tau,s\n");
                let m = points.max(2) - 1;
                for k in 0..=m {
                    let t = self.tau_min + (self.tau_max - self.tau_min) * T::from_usize_lossy(k) / T::from_usize_lossy(m);
                    out.push_str(&format!("{},{}\n", t.as_f64(), e.scale(t).0.as_f64()));
                }
            }
            Body::Scale { samples, .. } => {
                out.push_str("tau,s\n");
                for s in samples {
                    out.push_str(&format!("{},{}\n", s.t.as_f64(), s.y[0].as_f64()));
                }
            }
            Body::Profile { h, samples, .. } => {
                out.push_str("tau,r,psi,phi\n");
                for s in samples {
                    let len = s.y.len() / 2;
                    for j in 0..len {
                        let r = *h * T::from_usize_lossy(j);
                        out.push_str(&format!("{},{},{},{}\n", s.t.as_f64(), r.as_f64(), s.y[j].as_f64(), s.y[len + j].as_f64()));
                    }
                }
            }
        }
        out
    }
}

impl<T: Real> Flow<T> for FlowHistory<T> {
    fn dimension(&self) -> usize {
        match &self.body {
            Body::Exact(e) => e.dimension(),
            Body::Scale { geometry, .. } => geometry.dimension(),
            Body::Profile { n, .. } => *n,
        }
    }

    fn tau_range(&self) -> (T, T) {
        (self.tau_min, self.tau_max)
    }

    fn snapshot(&self, tau: T) -> Result<MetricSnapshot<T>> {
        check_range(tau, self.tau_range())?;
        match &self.body {
            Body::Exact(e) => {
                let geometry = match *e {
                    ExactFlow::GaussianStatic { n } => ModelGeometry::HomogeneousFlat { n },
                    ExactFlow::ShrinkingSphere { n, .. } => ModelGeometry::HomogeneousRound { n },
                };
                MetricSnapshot::new(tau, geometry, e.scale(tau).0)
            }
            Body::Scale { samples, .. } | Body::Profile { samples, .. } => {
                let y = Self::state_at(samples, tau);
                self.snapshot_from_state(tau, &y)
            }
        }
    }

    fn log_metric_rate(&self, tau: T, r: T) -> Result<(T, T, bool)> {
        check_range(tau, self.tau_range())?;
        match &self.body {
            Body::Exact(e) => {
                let (s, ds) = e.scale(tau);
                Ok((ds / s, ds / s, false))
            }
            Body::Scale { samples, .. } | Body::Profile { samples, .. } => {
                // Three nearest stored samples, Lagrange-differenced.
                let m = samples.len();
                if m < 3 {
                    return Err(LabError::Stencil { needed: 3, available: m });
                }
                let k = samples.partition_point(|s| s.t < tau).min(m - 1);
                let centre = k.clamp(1, m - 2);
                let nearest = if k > 0 && (samples[k].t - tau).abs() > (tau - samples[k - 1].t).abs() {
                    k - 1
                } else {
                    k
                };
                let flagged = nearest == 0 || nearest == m - 1;
                let idx = [centre - 1, centre, centre + 1];
                let mut rr = [T::zero(); 3];
                let mut tt = [T::zero(); 3];
                for (slot, &i) in idx.iter().enumerate() {
                    let g = self.snapshot_from_state(samples[i].t, &samples[i].y)?.radial(r)?;
                    let (a, b) = log_components(&g);
                    rr[slot] = a;
                    tt[slot] = b.unwrap_or(T::zero());
                }
                let ts = idx.map(|i| samples[i].t);
                Ok((lagrange3(tau, ts, rr).1, lagrange3(tau, ts, tt).1, flagged))
            }
        }
    }
}

/// Flow residual at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowResidual<T> {
    /// `max |∂_τ g(e,e) − 2 Ric(e,e)|` over the orthonormal radial and
    /// tangential directions `e`.
    pub value: T,
    /// Set when the time derivative used a one-sided stencil.
    pub boundary: bool,
}

/// Orthonormal-frame residual of `∂_τ g − 2 Ric` at `(τ, r)`.
pub fn flow_residual<T: Real, F: Flow<T> + ?Sized>(flow: &F, tau: T, r: T) -> Result<FlowResidual<T>> {
    let g = flow.radial(tau, r)?;
    let (rate_rr, rate_tt, boundary) = flow.log_metric_rate(tau, r)?;
    let two = T::lit(2.0);
    let mut value = (rate_rr - two * g.ric_rad).abs();
    if g.psi.abs() > T::zero() {
        value = value.max((rate_tt - two * g.ric_tan).abs());
    }
    Ok(FlowResidual { value, boundary })
}

/// Left and right `k`-th time derivatives of metric components at `τ*`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SidedDerivatives<T> {
    pub left: Vec<T>,
    pub right: Vec<T>,
}

impl<T: Real> SidedDerivatives<T> {
    /// `max_i |left_i − right_i|`.
    pub fn gap(&self) -> T {
        self.left.iter().zip(&self.right).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Largest component magnitude, for normalizing gaps.
    pub fn magnitude(&self) -> T {
        self.left.iter().chain(&self.right).fold(T::zero(), |m, &a| m.max(a.abs()))
    }
}

/// One-sided `k`-th τ-derivatives (`k ≤ 3`) of the metric components at
/// `radii` (homogeneous flows report their scale), second-order accurate in
/// the stencil step `step`.
pub fn one_sided_time_derivatives<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    tau_star: T,
    k: usize,
    step: T,
    radii: &[T],
) -> Result<SidedDerivatives<T>> {
    let width = crate::numerics::stencil::forward_weights(k)?.len();
    let (lo, hi) = flow.tau_range();
    let reach = step * T::from_usize_lossy(width - 1);
    let available = |room: T| ((room / step).floor().to_usize().unwrap_or(0) + 1).min(width);
    if tau_star - reach < lo - T::lit(1e-12) {
        return Err(LabError::Stencil { needed: width, available: available(tau_star - lo) });
    }
    if tau_star + reach > hi + T::lit(1e-12) {
        return Err(LabError::Stencil { needed: width, available: available(hi - tau_star) });
    }
    let side_derivs = |side: Side| -> Result<Vec<T>> {
        let sign = if side == Side::Left { -T::one() } else { T::one() };
        let mut rows: Vec<Vec<T>> = Vec::with_capacity(width);
        for j in 0..width {
            let t = tau_star + sign * step * T::from_usize_lossy(j);
            rows.push(flow.snapshot_sided(t, side)?.components(radii)?);
        }
        let comps = rows[0].len();
        (0..comps)
            .map(|c| {
                let col: Vec<T> = rows.iter().map(|r| r[c]).collect();
                one_sided(&col, step, k, side)
            })
            .collect()
    };
    Ok(SidedDerivatives { left: side_derivs(Side::Left)?, right: side_derivs(Side::Right)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_scale_at_zero() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 2.0).unwrap();
        assert_eq!(f.snapshot(0.0).unwrap().scale, 4.0);
        let c = f.snapshot(1.0).unwrap().curvature_at(0.2).unwrap();
        assert!((c.scalar - 3.0 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn exact_residual_vanishes() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 2.0).unwrap();
        for &t in &[0.0, 0.3, 1.7, 2.0] {
            assert!(flow_residual(&f, t, 0.5).unwrap().value < 1e-15);
        }
    }

    #[test]
    fn gaussian_is_static() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 2 }, 0.0, 10.0).unwrap();
        assert_eq!(f.snapshot(5.0).unwrap().scale, f.snapshot(0.0).unwrap().scale);
    }

    #[test]
    fn bad_offset() {
        assert!(exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 0.0 }, 0.0, 1.0).is_err());
    }

    #[test]
    fn round_ode() {
        let s0 = MetricSnapshot::new(0.0, ModelGeometry::HomogeneousRound { n: 3 }, 4.0_f64).unwrap();
        let f = evolve_backward(&s0, 1.0, StepControl::new(1e-10, 1e-12)).unwrap();
        assert!((f.snapshot(1.0).unwrap().scale - 8.0).abs() < 1e-8);
    }

    #[test]
    fn out_of_range() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 1.0).unwrap();
        assert!(matches!(f.snapshot(1.5), Err(LabError::TimeRange { .. })));
    }

    #[test]
    fn smooth_sides_agree() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 4.0).unwrap();
        let d = one_sided_time_derivatives(&f, 2.0, 1, 0.01, &[]).unwrap();
        assert!(d.gap() < 1e-8);
        assert!((d.left[0] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn stencil_needs_room() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 1.0).unwrap();
        assert!(matches!(
            one_sided_time_derivatives(&f, 0.01, 2, 0.01, &[]),
            Err(LabError::Stencil { .. })
        ));
    }
}
