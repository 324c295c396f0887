//! Ancient solutions spliced from a shrinking breather.
//!
//! A breather is a backward flow `g₀` on `[0, 1]` with `α g₀(1) = φ* g₀(0)`.
//! Copy `i ≥ 1` is `g_i(τ) = α^{-i} (φ^i)* g₀(α^i (τ − τ_{i−1}))` on
//! `[τ_{i−1}, τ_i]`, where `τ_i = Σ_{k≤i} α^{-k}`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::flow::{one_sided_time_derivatives, Flow};
use crate::lgeo::curve::{l_energy, CurveSegment, LCurve};
use crate::metric::MetricSnapshot;
use crate::numerics::stencil::Side;
use crate::scalar::Real;

/// Diffeomorphisms with exact pullbacks on the symmetric models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "lambda", rename_all = "snake_case")]
pub enum Diffeo<T> {
    Identity,
    /// `x ↦ λ x` along rays through the pole.
    RadialScaling(T),
}

impl<T: Real> Diffeo<T> {
    /// Radial factor of `φ^k` (`k` may be negative).
    pub fn factor(&self, k: i32) -> T {
        match *self {
            Self::Identity => T::one(),
            Self::RadialScaling(l) => l.powi(k),
        }
    }

    /// `(φ^k)* g` scaled by `c`.
    pub fn pull(&self, g: &MetricSnapshot<T>, k: i32, c: T) -> Result<MetricSnapshot<T>> {
        g.pulled_back(c, self.factor(k))
    }

    /// Image of a radial coordinate under `φ^k`.
    pub fn apply(&self, r: T, k: i32) -> T {
        self.factor(k) * r
    }
}

/// Default certification tolerance for closed-form breathers.
pub const CERT_TOL: f64 = 1e-10;

/// A shrinking breather `(g₀, α, φ)` and its identity residual.
#[derive(Clone)]
pub struct BreatherSpec<T: Real> {
    pub g0: Arc<dyn Flow<T>>,
    pub alpha: T,
    pub phi: Diffeo<T>,
    /// Relative residual `max |α g₀(1) − φ* g₀(0)| / max |φ* g₀(0)|`.
    pub residual: T,
    pub tolerance: T,
}

impl<T: Real> std::fmt::Debug for BreatherSpec<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BreatherSpec")
            .field("alpha", &self.alpha)
            .field("phi", &self.phi)
            .field("residual", &self.residual)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

/// Radii at which metric components are compared (profile models only).
fn probe_radii<T: Real>(g: &MetricSnapshot<T>) -> Vec<T> {
    match g.coordinate_limit() {
        Some(max) if g.geometry.kind() == crate::metric::ModelKind::RotSym => {
            (1..=16).map(|k| max * T::from_usize_lossy(k) / T::lit(17.0)).collect()
        }
        _ => Vec::new(),
    }
}

/// Relative max-norm distance between two snapshots' components.
pub fn snapshot_gap<T: Real>(a: &MetricSnapshot<T>, b: &MetricSnapshot<T>, radii: &[T]) -> Result<T> {
    let ca = a.components(radii)?;
    let cb = b.components(radii)?;
    let scale = cb.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    let diff = ca.iter().zip(&cb).fold(T::zero(), |m, (&x, &y)| m.max((x - y).abs()));
    Ok(diff / scale.max(T::min_positive_value()))
}

impl<T: Real> BreatherSpec<T> {
    /// Measures the breather identity of `g₀` on `[0, 1]`.
    pub fn new(g0: Arc<dyn Flow<T>>, alpha: T, phi: Diffeo<T>, tolerance: T) -> Result<Self> {
        if !(alpha > T::zero() && alpha < T::one()) {
            return Err(LabError::Parameter(format!("α = {alpha} outside (0, 1)")));
        }
        if let Diffeo::RadialScaling(l) = phi {
            if !(l > T::zero()) {
                return Err(LabError::Parameter(format!("radial scaling λ = {l} must be positive")));
            }
        }
        let (lo, hi) = g0.tau_range();
        if lo > T::zero() || hi < T::one() {
            return Err(LabError::Parameter("breather flow must cover τ ∈ [0, 1]".into()));
        }
        let end = g0.snapshot(T::one())?.pulled_back(alpha, T::one())?;
        let start = phi.pull(&g0.snapshot(T::zero())?, 1, T::one())?;
        let radii = probe_radii(&start);
        let residual = snapshot_gap(&end, &start, &radii)?;
        Ok(Self { g0, alpha, phi, residual, tolerance })
    }

    pub fn certified(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// `τ_i = Σ_{k=0}^{i} α^{-k}` for `i = 0..=i_max`.
pub fn junction_times<T: Real>(alpha: T, i_max: usize) -> Result<Vec<T>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(LabError::Parameter(format!("α = {alpha} outside (0, 1)")));
    }
    let mut out = Vec::with_capacity(i_max + 1);
    let mut term = T::one();
    let mut acc = T::one();
    out.push(acc);
    for _ in 0..i_max {
        term /= alpha;
        acc += term;
        out.push(acc);
    }
    Ok(out)
}

/// The ancient solution assembled from copies of a breather, on `[0, τ_{i_max}]`.
#[derive(Debug, Clone)]
pub struct SplicedFlow<T: Real> {
    pub breather: BreatherSpec<T>,
    pub junctions: Vec<T>,
}

/// Splices `i_max` rescaled copies after `g₀`; refuses uncertified breathers.
pub fn splice<T: Real>(breather: BreatherSpec<T>, i_max: usize) -> Result<SplicedFlow<T>> {
    if !breather.certified() {
        return Err(LabError::Uncertified {
            residual: breather.residual.as_f64(),
            tolerance: breather.tolerance.as_f64(),
        });
    }
    splice_unchecked(breather, i_max)
}

/// Splice without the certificate check, for fault injection.
pub fn splice_unchecked<T: Real>(breather: BreatherSpec<T>, i_max: usize) -> Result<SplicedFlow<T>> {
    let junctions = junction_times(breather.alpha, i_max)?;
    Ok(SplicedFlow { breather, junctions })
}

impl<T: Real> SplicedFlow<T> {
    pub fn i_max(&self) -> usize {
        self.junctions.len() - 1
    }

    /// Piece index containing `τ`; interfaces belong to the left piece.
    fn piece(&self, tau: T, side: Side) -> usize {
        let k = match side {
            Side::Left => self.junctions.partition_point(|&t| t < tau),
            Side::Right => self.junctions.partition_point(|&t| t <= tau),
        };
        k.min(self.i_max())
    }

    fn piece_start(&self, i: usize) -> T {
        if i == 0 {
            T::zero()
        } else {
            self.junctions[i - 1]
        }
    }

    /// Local time `α^i (τ − τ_{i−1})` of `g₀` inside piece `i`.
    fn local_time(&self, i: usize, tau: T) -> T {
        if i == 0 {
            return tau;
        }
        let a = self.breather.alpha.powi(i as i32);
        (a * (tau - self.piece_start(i))).max(T::zero()).min(T::one())
    }

    fn piece_snapshot(&self, i: usize, tau: T) -> Result<MetricSnapshot<T>> {
        let b = &self.breather;
        let base = b.g0.snapshot(self.local_time(i, tau))?;
        let mut out = b.phi.pull(&base, i as i32, b.alpha.powi(-(i as i32)))?;
        out.tau = tau;
        Ok(out)
    }

    /// `x_i = φ^{-(i+1)}(p₀)` for `i = 0..=i_max`.
    pub fn base_points(&self, p0: T) -> Vec<T> {
        base_points(self.breather.phi, p0, self.i_max())
    }

    /// Test curve `γ_i` of the construction: `σ` on `[0, 1]` followed by the
    /// pulled-back copies `σ_j` on `[τ_j, τ_{j+1}]`, `j = 0..=i`, where `σ` is
    /// the radial segment from `p₀` to `x₀` traversed linearly in `τ`.
    pub fn test_curve(&self, p0: T, i: usize, m: usize) -> Result<LCurve<T>> {
        if i + 1 > self.i_max() {
            return Err(LabError::Horizon {
                needed: junction_times(self.breather.alpha, i + 1)?[i + 1].as_f64(),
                available: self.junctions[self.i_max()].as_f64(),
            });
        }
        let x0 = self.breather.phi.apply(p0, -1);
        let dx = x0 - p0;
        let two = T::lit(2.0);
        let mut segments = vec![CurveSegment::sample(T::zero(), T::one(), m, |s| (p0 + s * s * dx, two * s * dx))];
        let alpha = self.breather.alpha;
        for j in 0..=i {
            let tj = self.junctions[j];
            let a = alpha.powi(j as i32 + 1);
            let f = self.breather.phi.factor(-(j as i32 + 1));
            let seg = CurveSegment::sample(tj.sqrt(), self.junctions[j + 1].sqrt(), m, |s| {
                let u = a * (s * s - tj);
                (f * (p0 + u * dx), f * dx * a * two * s)
            });
            segments.push(seg);
        }
        LCurve::new(segments)
    }

    /// Upper bound `L(γ_i) / (2 √τ_{i+1})` for `l(x_{i+1}, τ_{i+1})`.
    pub fn test_curve_bound(&self, p0: T, i: usize) -> Result<T> {
        let curve = self.test_curve(p0, i, 64)?;
        Ok(l_energy(self, &curve)? / (T::lit(2.0) * self.junctions[i + 1].sqrt()))
    }
}

/// `x_i = φ^{-(i+1)}(p₀)` as radial coordinates.
pub fn base_points<T: Real>(phi: Diffeo<T>, p0: T, i_max: usize) -> Vec<T> {
    (0..=i_max).map(|i| phi.apply(p0, -(i as i32 + 1))).collect()
}

impl<T: Real> Flow<T> for SplicedFlow<T> {
    fn dimension(&self) -> usize {
        self.breather.g0.dimension()
    }

    fn tau_range(&self) -> (T, T) {
        (T::zero(), self.junctions[self.i_max()])
    }

    fn snapshot(&self, tau: T) -> Result<MetricSnapshot<T>> {
        self.snapshot_sided(tau, Side::Left)
    }

    fn snapshot_sided(&self, tau: T, side: Side) -> Result<MetricSnapshot<T>> {
        let (lo, hi) = self.tau_range();
        if tau < lo || tau > hi * (T::one() + T::lit(1e-14)) || !tau.is_finite() {
            return Err(LabError::TimeRange { tau: tau.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        self.piece_snapshot(self.piece(tau, side), tau)
    }

    fn smooth_window(&self, tau: T) -> (T, T) {
        let i = self.piece(tau, Side::Left);
        (self.piece_start(i), self.junctions[i])
    }

    fn log_metric_rate(&self, tau: T, r: T) -> Result<(T, T, bool)> {
        let i = self.piece(tau, Side::Left);
        let a = self.breather.alpha.powi(i as i32);
        let x = self.breather.phi.apply(r, i as i32);
        let (rr, tt, flag) = self.breather.g0.log_metric_rate(self.local_time(i, tau), x)?;
        Ok((a * rr, a * tt, flag))
    }
}

/// Per-junction one-sided derivative gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JunctionRow<T> {
    pub i: usize,
    pub tau: T,
    /// Scale-free gaps `τ^k |∂^k_- g − ∂^k_+ g| / |g|` for `k = 0..=order`.
    pub gaps: Vec<T>,
}

/// Junction certificate: one-sided τ-derivatives of orders `0..=order` at
/// every interface `τ_i`, `i < i_max`. The stencil step is `step_frac` times
/// the shorter adjacent piece.
pub fn junction_certificate<T: Real>(
    spliced: &SplicedFlow<T>,
    order: usize,
    step_frac: T,
) -> Result<Vec<JunctionRow<T>>> {
    if order > 3 {
        return Err(LabError::Parameter(format!("junction order {order} > 3")));
    }
    let radii = {
        let s = spliced.snapshot(T::zero())?;
        probe_radii(&s)
    };
    let mut rows = Vec::new();
    for i in 0..spliced.i_max() {
        let tau = spliced.junctions[i];
        let left_width = tau - spliced.piece_start(i);
        let step = left_width * step_frac;
        let scaled_radii: Vec<T> = radii.iter().map(|&r| spliced.breather.phi.apply(r, -(i as i32))).collect();
        let g = spliced.snapshot(tau)?.components(&scaled_radii)?;
        let norm = g.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
        let mut gaps = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let d = one_sided_time_derivatives(spliced, tau, k, step, &scaled_radii)?;
            gaps.push(tau.powi(k as i32) * d.gap() / norm);
        }
        rows.push(JunctionRow { i, tau, gaps });
    }
    Ok(rows)
}

/// The blow-down `g_i(τ) = τ_i^{-1} g(τ τ_i)` of a flow.
#[derive(Clone)]
pub struct RescaledFlow<T: Real> {
    pub base: Arc<dyn Flow<T>>,
    pub factor: T,
}

impl<T: Real> RescaledFlow<T> {
    pub fn new(base: Arc<dyn Flow<T>>, factor: T) -> Result<Self> {
        if !(factor > T::zero()) {
            return Err(LabError::Parameter("rescaling factor must be positive".into()));
        }
        Ok(Self { base, factor })
    }
}

impl<T: Real> Flow<T> for RescaledFlow<T> {
    fn dimension(&self) -> usize {
        self.base.dimension()
    }

    fn tau_range(&self) -> (T, T) {
        let (lo, hi) = self.base.tau_range();
        (lo / self.factor, hi / self.factor)
    }

    fn snapshot(&self, tau: T) -> Result<MetricSnapshot<T>> {
        self.snapshot_sided(tau, Side::Left)
    }

    fn snapshot_sided(&self, tau: T, side: Side) -> Result<MetricSnapshot<T>> {
        let mut s = self.base.snapshot_sided(tau * self.factor, side)?.pulled_back(T::one() / self.factor, T::one())?;
        s.tau = tau;
        Ok(s)
    }

    fn smooth_window(&self, tau: T) -> (T, T) {
        let (lo, hi) = self.base.smooth_window(tau * self.factor);
        (lo / self.factor, hi / self.factor)
    }

    fn log_metric_rate(&self, tau: T, r: T) -> Result<(T, T, bool)> {
        let (a, b, f) = self.base.log_metric_rate(tau * self.factor, r)?;
        Ok((a * self.factor, b * self.factor, f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{exact_flow, flow_residual, ExactFlow};

    fn sphere(alpha: f64) -> BreatherSpec<f64> {
        let g0 = Arc::new(exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0 }, 0.0, 1.0).unwrap());
        BreatherSpec::new(g0, alpha, Diffeo::Identity, CERT_TOL).unwrap()
    }

    fn gaussian(alpha: f64) -> BreatherSpec<f64> {
        let g0 = Arc::new(exact_flow(ExactFlow::GaussianStatic { n: 3 }, 0.0, 1.0).unwrap());
        BreatherSpec::new(g0, alpha, Diffeo::RadialScaling(alpha.sqrt()), CERT_TOL).unwrap()
    }

    #[test]
    fn junction_sums() {
        assert_eq!(junction_times(0.5, 2).unwrap(), vec![1.0, 3.0, 7.0]);
        assert_eq!(junction_times(0.25, 1).unwrap()[1], 5.0);
        assert!(junction_times(1.0, 3).is_err());
    }

    #[test]
    fn sphere_is_linear_law() {
        let s = splice(sphere(0.5), 10).unwrap();
        for &t in &[0.3, 1.0, 2.5, 3.0, 100.0, 1000.0] {
            let g = s.snapshot(t).unwrap();
            assert!((g.scale - 4.0 * (t + 1.0)).abs() < 1e-8 * (t + 1.0), "τ = {t}");
        }
    }

    #[test]
    fn gaussian_is_static() {
        let s = splice(gaussian(0.25), 6).unwrap();
        for &t in &[0.5, 3.0, 40.0] {
            assert!((s.snapshot(t).unwrap().scale - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn no_copies() {
        let s = splice(sphere(0.5), 0).unwrap();
        assert_eq!(s.tau_range(), (0.0, 1.0));
        assert_eq!(s.snapshot(0.5).unwrap().scale, 6.0);
    }

    #[test]
    fn refuses_uncertified() {
        assert!(matches!(splice(sphere(0.505), 3), Err(LabError::Uncertified { .. })));
    }

    #[test]
    fn base_point_radii() {
        let x = base_points(Diffeo::RadialScaling(0.5), 1.0, 2);
        assert_eq!(x, vec![2.0, 4.0, 8.0]);
        assert_eq!(base_points(Diffeo::Identity, 0.3, 2), vec![0.3; 3]);
    }

    #[test]
    fn spliced_residual_vanishes() {
        let s = splice(sphere(0.5), 5).unwrap();
        for &t in &[0.5, 2.0, 5.5, 40.0] {
            assert!(flow_residual(&s, t, 0.4).unwrap().value < 1e-12);
        }
    }

    #[test]
    fn smooth_junctions() {
        let s = splice(sphere(0.5), 8).unwrap();
        for row in junction_certificate(&s, 2, 0.01).unwrap() {
            assert!(row.gaps.iter().all(|&g| g < 1e-6), "{row:?}");
        }
    }

    #[test]
    fn corrupted_alpha_breaks_continuity() {
        let spec = sphere(0.505);
        let s = splice_unchecked(spec, 4).unwrap();
        let rows = junction_certificate(&s, 0, 0.01).unwrap();
        assert!(rows[0].gaps[0] > 1e-3);
    }

    #[test]
    fn rescaled_copy_identity() {
        let alpha = 0.5;
        let s = Arc::new(splice(sphere(alpha), 12).unwrap());
        let i = 6;
        let ti = s.junctions[i];
        let g = RescaledFlow::new(s.clone(), ti).unwrap();
        let t: f64 = 1.3;
        let direct = s.breather.g0.snapshot(alpha.powi(i as i32 + 1) * (ti * t - ti)).unwrap();
        let factor = alpha.powi(-(i as i32 + 1)) / ti;
        let expect = direct.scale * factor;
        assert!((g.snapshot(t).unwrap().scale - expect).abs() < 1e-8 * expect);
    }

    #[test]
    fn gaussian_test_curve_closed_form() {
        // Flat L-energy of γ_0 = σ on [0,1] then σ_0 on [1, τ_1]:
        // ∫₀¹ √τ |dx|² dτ + ∫₀¹ √(1 + u/α) |dx|² du with |σ'_0|² = α|dx|².
        let alpha: f64 = 0.25;
        let s = splice(gaussian(alpha), 3).unwrap();
        let dx: f64 = 1.0;
        let seg0 = 2.0 / 3.0 * dx * dx;
        let seg1 = dx * dx * 2.0 * alpha / 3.0 * ((1.0 + 1.0 / alpha).powf(1.5) - 1.0);
        let expect = (seg0 + seg1) / (2.0 * s.junctions[1].sqrt());
        let got = s.test_curve_bound(1.0, 0).unwrap();
        assert!((got - expect).abs() < 1e-9, "{got} vs {expect}");
    }
}
