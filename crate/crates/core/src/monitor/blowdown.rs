//! Blow-down stages `g_i(τ) = τ_i^{-1} g(τ τ_i)` along the base points.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::flow::Flow;
use crate::lgeo::bvp::{solve_bvp, BvpSettings};
use crate::lgeo::field::{lin, reduced_field, FieldSpec, ReducedField};
use crate::metric::ModelKind;
use crate::scalar::Real;
use crate::splice::{RescaledFlow, SplicedFlow};

/// Window and resolution of every stage.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowdownSettings<T> {
    /// Radius of the ball `B(x_i, r)` in `g_i(1)`.
    pub radius: T,
    /// The field window is `[1 + ε, 2 − ε]`.
    pub eps: T,
    pub nr: usize,
    pub nt: usize,
    pub bvp: BvpSettings<T>,
}

impl<T: Real> Default for BlowdownSettings<T> {
    fn default() -> Self {
        Self { radius: T::one(), eps: T::lit(0.1), nr: 9, nt: 9, bvp: BvpSettings::default() }
    }
}

/// Type I diagnostics of one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageDiagnostics<T> {
    /// `l_i(x_i, 1)`.
    pub l_at_base: T,
    /// `sup |Rm|` on `B(x_i, r) × [1, 2]`.
    pub curv_bound: T,
    /// `K_i ≥ 0` with `Ric ≥ −K_i g` on the same set.
    pub ricci_lower: T,
    /// Conjugate-radius lower bound `π / √(sup sec)`; infinite when flat.
    pub inj_proxy: T,
}

/// One blow-down stage with its reduced-distance field on the window.
#[derive(Clone)]
pub struct BlowdownStage<T: Real> {
    pub i: usize,
    pub tau_i: T,
    pub flow: RescaledFlow<T>,
    /// Coordinate of `x_i` relative to the base point.
    pub base: T,
    /// Distance of `x_i` from the base point in `g_i(1)`.
    pub base_distance: T,
    pub field: ReducedField<T>,
    pub diagnostics: StageDiagnostics<T>,
}

impl<T: Real> std::fmt::Debug for BlowdownStage<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BlowdownStage")
            .field("i", &self.i)
            .field("tau_i", &self.tau_i)
            .field("base", &self.base)
            .field("diagnostics", &self.diagnostics)
            .finish()
    }
}

/// Coordinate of `x_i = φ^{-(i+1)}(p₀)` seen from `p₀`.
///
/// L-geodesics start at the pole, so homogeneous models move `p₀` there by
/// symmetry; profile models need `p₀` at the pole.
pub fn base_offset<T: Real>(spliced: &SplicedFlow<T>, p0: T, i: usize) -> Result<T> {
    let x = spliced.breather.phi.apply(p0, -(i as i32 + 1));
    match spliced.snapshot(T::zero())?.geometry.kind() {
        ModelKind::Flat | ModelKind::Round => Ok((x - p0).abs()),
        ModelKind::RotSym if p0 == T::zero() => Ok(T::zero()),
        ModelKind::RotSym => Err(LabError::Parameter("profile models need the base point at the pole".into())),
    }
}

/// `l(x_i, τ_i)` on the spliced flow.
pub fn base_point_l<T: Real>(spliced: &SplicedFlow<T>, p0: T, i: usize, bvp: &BvpSettings<T>) -> Result<T> {
    let tau = *spliced.junctions.get(i).ok_or_else(|| LabError::Horizon {
        needed: i as f64,
        available: spliced.i_max() as f64,
    })?;
    Ok(solve_bvp(spliced, base_offset(spliced, p0, i)?, tau, bvp)?.l())
}

/// Coordinate radii whose pole distances cover `B(x, r)` in `snap`.
fn window_radii<T: Real>(flow: &RescaledFlow<T>, d: T, radius: T, nr: usize) -> Result<Vec<T>> {
    let snap = flow.snapshot(T::one())?;
    let lo = snap.coordinate_at_distance((d - radius).max(T::zero()))?;
    let mut hi = snap.coordinate_at_distance(d + radius)?;
    if snap.geometry.kind() == ModelKind::Round {
        hi = hi.min(T::PI());
    }
    Ok(lin((lo, hi), nr))
}

fn diagnostics<T: Real>(flow: &RescaledFlow<T>, base: T, radii: &[T], bvp: &BvpSettings<T>) -> Result<StageDiagnostics<T>> {
    let l_at_base = solve_bvp(flow, base, T::one(), bvp)?.l();
    let mut curv = T::zero();
    let mut sec_max = T::zero();
    let mut ric_min = T::infinity();
    for tau in lin((T::one(), T::lit(2.0)), 9) {
        for &r in radii {
            let g = flow.radial(tau, r)?;
            curv = curv.max(g.rm_norm());
            sec_max = sec_max.max(g.k_rad).max(g.k_tan);
            ric_min = ric_min.min(g.ric_rad).min(g.ric_tan);
        }
    }
    let inj_proxy = if sec_max > T::zero() { T::PI() / sec_max.sqrt() } else { T::infinity() };
    Ok(StageDiagnostics { l_at_base, curv_bound: curv, ricci_lower: (-ric_min).max(T::zero()), inj_proxy })
}

fn stage<T: Real>(
    spliced: &Arc<SplicedFlow<T>>,
    p0: T,
    i: usize,
    settings: &BlowdownSettings<T>,
) -> Result<BlowdownStage<T>> {
    let tau_i = spliced.junctions[i];
    let flow = RescaledFlow::new(spliced.clone() as Arc<dyn Flow<T>>, tau_i)?;
    let base = base_offset(spliced, p0, i)?;
    let base_distance = flow.snapshot(T::one())?.pole_distance(base)?;
    let radii = window_radii(&flow, base_distance, settings.radius, settings.nr)?;
    let taus = lin((T::one() + settings.eps, T::lit(2.0) - settings.eps), settings.nt);
    let mut spec = FieldSpec::lattice(radii.clone(), taus);
    spec.bvp = settings.bvp;
    let field = reduced_field(&flow, &spec)?;
    let diagnostics = diagnostics(&flow, base, &radii, &settings.bvp)?;
    Ok(BlowdownStage { i, tau_i, flow, base, base_distance, field, diagnostics })
}

/// Builds the requested stages concurrently. Every stage needs the splice
/// to cover `[τ_i, 2τ_i]`.
pub fn blowdown<T: Real>(
    spliced: Arc<SplicedFlow<T>>,
    p0: T,
    stages: &[usize],
    settings: &BlowdownSettings<T>,
) -> Result<Vec<BlowdownStage<T>>> {
    if !(settings.radius > T::zero()) || !(settings.eps >= T::zero() && settings.eps < T::lit(0.5)) {
        return Err(LabError::Parameter("blow-down radius must be positive and ε in [0, 1/2)".into()));
    }
    let (_, hi) = spliced.tau_range();
    for &i in stages {
        let tau_i = *spliced.junctions.get(i).ok_or_else(|| LabError::Horizon {
            needed: f64::INFINITY,
            available: hi.as_f64(),
        })?;
        let needed = T::lit(2.0) * tau_i;
        if needed > hi {
            return Err(LabError::Horizon { needed: needed.as_f64(), available: hi.as_f64() });
        }
    }
    stages.par_iter().map(|&i| stage(&spliced, p0, i, settings)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{exact_flow, ExactFlow};
    use crate::splice::{splice, BreatherSpec, Diffeo, CERT_TOL};

    fn gaussian(alpha: f64, i_max: usize) -> Arc<SplicedFlow<f64>> {
        let g0 = Arc::new(exact_flow(ExactFlow::GaussianStatic { n: 3 }, 0.0, 1.0).unwrap());
        let b = BreatherSpec::new(g0, alpha, Diffeo::RadialScaling(alpha.sqrt()), CERT_TOL).unwrap();
        Arc::new(splice(b, i_max).unwrap())
    }

    #[test]
    fn flat_stage_is_closed_form() {
        let s = BlowdownSettings { nr: 3, nt: 3, ..BlowdownSettings::default() };
        let stages = blowdown(gaussian(0.25, 6), 1.0, &[3], &s).unwrap();
        let st = &stages[0];
        for nd in &st.field.nodes {
            let d = st.flow.snapshot(1.0).unwrap().pole_distance(nd.r).unwrap();
            assert!((nd.l - d * d / (4.0 * nd.tau)).abs() < 1e-9, "{nd:?}");
        }
        let d = st.base_distance;
        assert!((st.diagnostics.l_at_base - d * d / 4.0).abs() < 1e-9);
        assert_eq!(st.diagnostics.curv_bound, 0.0);
        assert!(st.diagnostics.inj_proxy.is_infinite());
    }

    #[test]
    fn horizon_is_checked() {
        let s = BlowdownSettings::default();
        assert!(matches!(blowdown(gaussian(0.25, 3), 1.0, &[3], &s), Err(LabError::Horizon { .. })));
    }
}
