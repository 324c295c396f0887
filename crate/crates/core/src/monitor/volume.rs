//! Reduced volume by radial quadrature, and its monotonicity certificate.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::flow::Flow;
use crate::lgeo::bvp::BvpSettings;
use crate::metric::ModelKind;
use crate::lgeo::field::{lin, reduced_field, FieldSpec, ReducedField};
use crate::numerics::quad::simpson_uniform;
use crate::scalar::{unit_sphere_area, Real};

/// Integrand level below which the radial quadrature is truncated.
pub const CUTOFF: f64 = 1e-12;

/// `V(τ)` at one time with its truncation data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeSample<T> {
    pub tau: T,
    pub v: T,
    /// Coordinate radius where the quadrature stops.
    pub r_trunc: T,
    /// Estimate of the neglected tail beyond `r_trunc`.
    pub tail: T,
    /// The integrand had not dropped below the cutoff inside the lattice.
    pub truncated: bool,
}

/// Reduced volume at a sequence of times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedVolumeSeries<T> {
    pub samples: Vec<VolumeSample<T>>,
}

impl<T: Real> ReducedVolumeSeries<T> {
    pub fn taus(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.tau).collect()
    }

    pub fn values(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.v).collect()
    }
}

/// `ω_{n−1} (4πτ)^{−n/2} e^{−l} ψ^{n−1} φ` and `|∇l|²` times the same weight.
fn weights<T: Real, F: Flow<T> + ?Sized>(flow: &F, field: &ReducedField<T>, m: usize) -> Result<Vec<(T, T)>> {
    let n = field.n;
    let tau = field.taus[m];
    let omega = unit_sphere_area::<T>(n - 1);
    let norm = (T::lit(4.0) * T::PI() * tau).powf(-T::from_usize_lossy(n) / T::lit(2.0));
    field
        .row(m)
        .iter()
        .map(|nd| {
            let g = flow.radial(tau, nd.r)?;
            if !nd.l.is_finite() {
                return Err(LabError::UnreachedTarget { target: nd.r.as_f64(), tau: tau.as_f64() });
            }
            let w = omega * norm * (-nd.l).exp() * g.psi.abs().powi(n as i32 - 1) * g.phi;
            let g2 = if nd.grad_l.is_finite() { nd.grad_l * nd.grad_l } else { T::zero() };
            Ok((w, w * g2))
        })
        .collect()
}

/// Integrates one row, truncating where the integrand stays below the cutoff
/// and estimating the tail from the outermost slope of `l`.
fn integrate_row<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    field: &ReducedField<T>,
    m: usize,
    vals: &[T],
) -> Result<VolumeSample<T>> {
    let tau = field.taus[m];
    let radii = &field.radii;
    if radii.len() < 3 {
        return Err(LabError::Parameter("volume lattice needs at least 3 radii".into()));
    }
    let h = radii[1] - radii[0];
    let cutoff = T::lit(CUTOFF);
    let last_big = vals.iter().rposition(|&v| v >= cutoff).unwrap_or(0);
    let end = (last_big + 1).min(vals.len() - 1).max(2);
    let v = simpson_uniform(&vals[..=end], h);
    let row = field.row(m);
    let r_end = radii[end];
    let snap = flow.snapshot(tau)?;
    // The round slice closes at ρ = π.
    let close = match snap.geometry.kind() {
        ModelKind::Round => Some(T::PI()),
        _ => snap.coordinate_limit(),
    };
    let at_limit = close.map(|c| r_end >= c * (T::one() - T::lit(1e-12))).unwrap_or(false);
    let tail = if at_limit {
        T::zero()
    } else {
        // e^{−l} with l growing at its outermost slope, volume growth ψ^{n−1}.
        let g = flow.radial(tau, r_end)?;
        let slope = row[end].grad_l * g.phi;
        let growth = T::from_usize_lossy(field.n - 1) * g.psi_r / g.psi;
        let rate = slope - growth;
        if rate > T::zero() {
            vals[end] / rate
        } else {
            T::infinity()
        }
    };
    Ok(VolumeSample { tau, v, r_trunc: r_end, tail, truncated: last_big + 1 >= vals.len() })
}

/// `V(τ) = ∫ (4πτ)^{−n/2} e^{−l} dg` on row `m` of a field.
pub fn reduced_volume<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    field: &ReducedField<T>,
    m: usize,
) -> Result<VolumeSample<T>> {
    let w = weights(flow, field, m)?;
    let vals: Vec<T> = w.iter().map(|x| x.0).collect();
    integrate_row(flow, field, m, &vals)
}

/// `∫ |∇l|² (4πτ)^{−n/2} e^{−l} dg` on row `m` of a field.
pub fn weighted_gradient_bound<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    field: &ReducedField<T>,
    m: usize,
) -> Result<VolumeSample<T>> {
    let w = weights(flow, field, m)?;
    let vals: Vec<T> = w.iter().map(|x| x.1).collect();
    integrate_row(flow, field, m, &vals)
}

/// Radial lattice reaching `distance_factor · √τ` in metric units (capped at
/// the antipode of a round slice) with `nodes` points.
pub fn volume_radii<T: Real, F: Flow<T> + ?Sized>(flow: &F, tau: T, nodes: usize, distance_factor: T) -> Result<Vec<T>> {
    let snap = flow.snapshot(tau)?;
    let reach = distance_factor * tau.sqrt();
    let r_hi = match snap.geometry.kind() {
        ModelKind::Round => T::PI().min(snap.coordinate_at_distance(reach)?),
        ModelKind::Flat => snap.coordinate_at_distance(reach)?,
        ModelKind::RotSym => {
            let lim = snap.coordinate_limit().unwrap_or(T::max_value());
            snap.coordinate_at_distance(reach).unwrap_or(lim).min(lim)
        }
    };
    Ok(lin((T::zero(), r_hi), nodes))
}

/// Values-only field on a volume lattice at each `τ`, then `V(τ)`.
pub fn volume_series<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    taus: &[T],
    nodes: usize,
    bvp: &BvpSettings<T>,
) -> Result<ReducedVolumeSeries<T>> {
    let mut samples = Vec::with_capacity(taus.len());
    for &tau in taus {
        let radii = volume_radii(flow, tau, nodes, T::lit(12.0))?;
        let mut spec = FieldSpec::lattice(radii, vec![tau]).values_only();
        spec.bvp = *bvp;
        let field = reduced_field(flow, &spec)?;
        samples.push(reduced_volume(flow, &field, 0)?);
    }
    Ok(ReducedVolumeSeries { samples })
}

/// Outcome of the monotonicity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport<T> {
    pub pass: bool,
    /// Largest `V(τ_{m+1}) − V(τ_m)`, or zero.
    pub max_violation: T,
    /// Largest `V − 1`, or zero.
    pub max_excess: T,
}

/// Passes iff `V(τ_{m+1}) ≤ V(τ_m) + tol` for consecutive samples.
pub fn monotonicity_certificate<T: Real>(series: &ReducedVolumeSeries<T>, tol: T) -> Result<MonotonicityReport<T>> {
    if series.samples.len() < 3 {
        return Err(LabError::Parameter("monotonicity needs at least 3 samples".into()));
    }
    let mut sorted = series.samples.clone();
    sorted.sort_by(|a, b| a.tau.partial_cmp(&b.tau).unwrap_or(std::cmp::Ordering::Equal));
    let max_violation = sorted.windows(2).fold(T::zero(), |m, w| m.max(w[1].v - w[0].v));
    let max_excess = sorted.iter().fold(T::zero(), |m, s| m.max(s.v - T::one()));
    Ok(MonotonicityReport { pass: max_violation <= tol && sorted.iter().all(|s| s.v.is_finite()), max_violation, max_excess })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{exact_flow, ExactFlow};

    #[test]
    fn flat_volume_is_one() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let s = volume_series(&f, &[0.5, 1.0, 2.0], 97, &BvpSettings::default()).unwrap();
        for v in &s.samples {
            assert!((v.v - 1.0).abs() < 1e-6, "{v:?}");
            assert!(v.tail < 1e-10 && !v.truncated);
        }
    }

    #[test]
    fn flat_weighted_gradient() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let radii = volume_radii(&f, 1.0, 97, 12.0).unwrap();
        let field = reduced_field(&f, &FieldSpec::lattice(radii, vec![1.0]).values_only()).unwrap();
        let w = weighted_gradient_bound(&f, &field, 0).unwrap();
        assert!((w.v - 1.5).abs() < 1e-6, "{w:?}");
    }

    #[test]
    fn detector_sanity() {
        let mk = |v: &[f64]| ReducedVolumeSeries {
            samples: v
                .iter()
                .enumerate()
                .map(|(k, &v)| VolumeSample { tau: k as f64, v, r_trunc: 1.0, tail: 0.0, truncated: false })
                .collect(),
        };
        assert!(monotonicity_certificate(&mk(&[1.0, 1.0, 1.0]), 1e-6).unwrap().pass);
        let bad = monotonicity_certificate(&mk(&[0.9, 0.91, 0.8]), 1e-6).unwrap();
        assert!(!bad.pass && (bad.max_violation - 1e-2).abs() < 1e-12);
        assert!(monotonicity_certificate(&mk(&[0.9, 0.8]), 1e-6).is_err());
    }
}
