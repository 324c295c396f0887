//! Space-time curves and their L-energy.

use crate::error::{LabError, Result};
use crate::flow::Flow;
use crate::numerics::quad::simpson_uniform;
use crate::numerics::stencil::Side;
use crate::scalar::Real;

/// A piece of a radial space-time curve sampled uniformly in `σ = √τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSegment<T> {
    pub sigma0: T,
    pub dsigma: T,
    /// Radial coordinate `r_k` at `σ_k = σ₀ + k dσ`.
    pub r: Vec<T>,
    /// `dr/dσ` at the same nodes.
    pub dr: Vec<T>,
}

impl<T: Real> CurveSegment<T> {
    pub fn sigma(&self, k: usize) -> T {
        self.sigma0 + self.dsigma * T::from_usize_lossy(k)
    }

    pub fn sigma_end(&self) -> T {
        self.sigma(self.r.len() - 1)
    }

    /// Samples `σ ↦ (r, dr/dσ)` on `m` uniform intervals of `[a, b]`.
    pub fn sample<F: FnMut(T) -> (T, T)>(a: T, b: T, m: usize, mut f: F) -> Self {
        let m = m.max(2);
        let d = (b - a) / T::from_usize_lossy(m);
        let (r, dr) = (0..=m).map(|k| f(a + d * T::from_usize_lossy(k))).unzip();
        Self { sigma0: a, dsigma: d, r, dr }
    }
}

/// Radial curve `β(σ) = γ(σ²)` from the base point at `σ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LCurve<T> {
    pub segments: Vec<CurveSegment<T>>,
}

impl<T: Real> LCurve<T> {
    pub fn new(segments: Vec<CurveSegment<T>>) -> Result<Self> {
        let first = segments.first().ok_or_else(|| LabError::Parameter("curve has no segments".into()))?;
        if first.sigma0 != T::zero() {
            return Err(LabError::Parameter("curve must start at σ = 0".into()));
        }
        let tol = T::lit(1e-12);
        for s in &segments {
            if s.r.len() < 2 || s.r.len() != s.dr.len() || !(s.dsigma > T::zero()) {
                return Err(LabError::Parameter("curve segments need increasing σ samples".into()));
            }
        }
        for w in segments.windows(2) {
            let gap = (w[1].sigma0 - w[0].sigma_end()).abs();
            if gap > tol * w[0].sigma_end().max(T::one()) {
                return Err(LabError::Parameter("curve segments are not contiguous in σ".into()));
            }
        }
        Ok(Self { segments })
    }

    /// Final `σ̄ = √τ̄`.
    pub fn sigma_end(&self) -> T {
        self.segments.last().map(|s| s.sigma_end()).unwrap_or(T::zero())
    }

    pub fn endpoint(&self) -> T {
        *self.segments.last().and_then(|s| s.r.last()).expect("non-empty curve")
    }

    /// Endpoint velocity `γ'(τ̄) = β'(σ̄) / (2σ̄)`.
    pub fn endpoint_velocity(&self) -> T {
        let s = self.segments.last().expect("non-empty curve");
        *s.dr.last().expect("non-empty segment") / (T::lit(2.0) * self.sigma_end())
    }
}

/// `L(γ) = ∫ (2σ² R + ½ |β'|²) dσ`, composite Simpson on every segment.
pub fn l_energy<T: Real, F: Flow<T> + ?Sized>(flow: &F, curve: &LCurve<T>) -> Result<T> {
    let mut total = T::zero();
    for seg in &curve.segments {
        let last = seg.r.len() - 1;
        let mut vals = Vec::with_capacity(seg.r.len());
        for k in 0..=last {
            let s = seg.sigma(k);
            let side = if k == 0 { Side::Right } else { Side::Left };
            let g = flow.snapshot_sided(s * s, side)?.radial(seg.r[k]).map_err(|e| match e {
                LabError::Domain { .. } => LabError::Escape { sigma: s.as_f64() },
                other => other,
            })?;
            let speed = g.phi * seg.dr[k];
            vals.push(T::lit(2.0) * s * s * g.scalar + T::lit(0.5) * speed * speed);
        }
        total += simpson_uniform(&vals, seg.dsigma);
    }
    Ok(total)
}

/// Reduced distance of a curve, `L / (2 √τ̄)`.
pub fn reduced_length<T: Real, F: Flow<T> + ?Sized>(flow: &F, curve: &LCurve<T>) -> Result<T> {
    Ok(l_energy(flow, curve)? / (T::lit(2.0) * curve.sigma_end()))
}

/// Straight line in `σ` from the pole to `target` at `τ̄`: the Euclidean
/// minimizer, used as a comparison curve.
pub fn straight_curve<T: Real>(target: T, tau_bar: T, m: usize) -> Result<LCurve<T>> {
    let sb = tau_bar.sqrt();
    let slope = target / sb;
    LCurve::new(vec![CurveSegment::sample(T::zero(), sb, m, |s| (slope * s, slope))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{exact_flow, ExactFlow};

    #[test]
    fn flat_straight_line() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let c = straight_curve(3.0, 2.0, 16).unwrap();
        let l = l_energy(&f, &c).unwrap();
        assert!((l - 9.0 / (2.0 * 2f64.sqrt())).abs() < 1e-13);
        assert!((reduced_length(&f, &c).unwrap() - 9.0 / 8.0).abs() < 1e-13);
    }

    #[test]
    fn constant_curve_on_flat() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let c = LCurve::new(vec![CurveSegment::sample(0.0, 1.5, 8, |_| (0.7, 0.0))]).unwrap();
        assert_eq!(l_energy(&f, &c).unwrap(), 0.0);
    }

    #[test]
    fn constant_curve_on_sphere() {
        // ∫₀^τ̄ √s · 3/(2(s+1)) ds = 3(√τ̄ − atan √τ̄).
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 4.0).unwrap();
        let tb: f64 = 2.0;
        let c = LCurve::new(vec![CurveSegment::sample(0.0, tb.sqrt(), 256, |_| (0.3, 0.0))]).unwrap();
        let exact = 3.0 * (tb.sqrt() - tb.sqrt().atan());
        assert!((l_energy(&f, &c).unwrap() - exact).abs() < 1e-9);
    }

    #[test]
    fn rejects_gaps() {
        let a = CurveSegment::sample(0.0, 1.0, 4, |_| (0.0, 0.0));
        let b = CurveSegment::sample(1.5, 2.0, 4, |_| (0.0, 0.0));
        assert!(LCurve::new(vec![a, b]).is_err());
    }

    #[test]
    fn escape_is_reported() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 4.0).unwrap();
        let c = LCurve::new(vec![CurveSegment::sample(0.0, 1.0, 4, |_| (9.0, 0.0))]).unwrap();
        assert!(matches!(l_energy(&f, &c), Err(LabError::Escape { .. })));
    }
}
