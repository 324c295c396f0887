//! Two-point problem: the minimal L-geodesic from the pole to `(q, τ̄)`.

use crate::error::{LabError, Result};
use crate::flow::Flow;
use crate::lgeo::shoot::{shoot, shoot_endpoint, LGeodesicResult, ShootSettings};
use crate::metric::ModelKind;
use crate::numerics::roots::bisect;
use crate::scalar::Real;

/// Velocity scan and root-finding settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpSettings<T> {
    pub shoot: ShootSettings<T>,
    /// Scan range `[v_min, v_max]` for `|v|` in metric units at the base point.
    pub v_min: T,
    pub v_max: T,
    /// Brackets of the sign-symmetric logarithmic scan.
    pub brackets: usize,
    /// Relative L tolerance under which two branches tie.
    pub tie_tol: T,
}

impl<T: Real> Default for BvpSettings<T> {
    fn default() -> Self {
        Self {
            shoot: ShootSettings::default(),
            v_min: T::lit(1e-4),
            v_max: T::lit(1e3),
            brackets: 64,
            tie_tol: T::lit(1e-9),
        }
    }
}

/// Signed coordinates along the shooting ray that represent the target.
fn target_images<T: Real>(kind: ModelKind, q: T) -> Vec<T> {
    match kind {
        ModelKind::Round => {
            let two_pi = T::PI() * T::lit(2.0);
            if q == T::zero() {
                vec![T::zero()]
            } else {
                vec![q, q - q.signum() * two_pi]
            }
        }
        _ => vec![q],
    }
}

/// Sign-symmetric logarithmic velocity grid with `brackets + 1` nodes.
pub fn velocity_grid<T: Real>(v_min: T, v_max: T, brackets: usize) -> Vec<T> {
    let half = (brackets / 2).max(1);
    let ratio = (v_max / v_min).ln() / T::from_usize_lossy((half - 1).max(1));
    let pos: Vec<T> = (0..half).map(|k| v_min * (ratio * T::from_usize_lossy(k)).exp()).collect();
    let mut out: Vec<T> = pos.iter().rev().map(|&v| -v).collect();
    out.push(T::zero());
    out.extend(pos);
    out
}

fn model_kind<T: Real, F: Flow<T> + ?Sized>(flow: &F) -> Result<ModelKind> {
    Ok(flow.snapshot(flow.tau_range().0)?.geometry.kind())
}

/// Endpoint map with escapes mapped to `±∞`.
fn endpoint<T: Real, F: Flow<T> + ?Sized>(flow: &F, v: T, tau_bar: T, s: &ShootSettings<T>) -> Result<T> {
    match shoot_endpoint(flow, v, tau_bar, s) {
        Ok(y) => Ok(y[0]),
        Err(LabError::Escape { .. }) => Ok(if v > T::zero() { T::infinity() } else { T::neg_infinity() }),
        Err(e) => Err(e),
    }
}

fn refine<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    target: T,
    tau_bar: T,
    (a, fa): (T, T),
    b: T,
    s: &ShootSettings<T>,
) -> Result<T> {
    if fa == T::zero() {
        return Ok(a);
    }
    let scale = target.abs().max(T::one());
    let f = |v: T| -> Result<T> { Ok(endpoint(flow, v, tau_bar, s)? - target) };
    bisect(f, a, b, fa, T::lit(4.0) * T::epsilon() * a.abs().max(b.abs()), T::lit(1e-14) * scale, 200)
}

fn finish<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    tau_bar: T,
    mut roots: Vec<T>,
    s: &ShootSettings<T>,
    tie_tol: T,
) -> Result<LGeodesicResult<T>> {
    roots.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(std::cmp::Ordering::Equal));
    roots.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-12) * a.abs().max(T::one()));
    let mut branches = Vec::with_capacity(roots.len());
    for v in roots {
        branches.push(shoot(flow, v, tau_bar, s)?);
    }
    let best = branches
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.l_energy.partial_cmp(&b.l_energy).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(k, _)| k)
        .expect("at least one branch");
    let lb = branches[best].l_energy;
    let tol = tie_tol * lb.abs().max(T::one());
    // Smallest |v| among tied branches (roots are sorted by |v|).
    let chosen = branches.iter().position(|b| (b.l_energy - lb).abs() <= tol).unwrap_or(best);
    let ties = branches.iter().filter(|b| (b.l_energy - lb).abs() <= tol).count();
    let mut out = branches.swap_remove(chosen);
    out.minimal = true;
    out.tie = ties > 1;
    let dv = T::lit(1e-5) * out.v.abs().max(T::lit(1e-3));
    let hi = endpoint(flow, out.v + dv, tau_bar, s)?;
    let lo = endpoint(flow, out.v - dv, tau_bar, s)?;
    out.conjugate_flag = !((hi - lo) / (T::lit(2.0) * dv) > T::lit(1e-8));
    Ok(out)
}

/// Minimal L-geodesic from the pole to signed radial coordinate `q` at `τ̄`.
///
/// Scans a sign-symmetric logarithmic grid of initial velocities, bisects
/// every bracket of the endpoint map around each image of the target, and
/// returns the branch of least L (ties go to the smallest `|v|`).
pub fn solve_bvp<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    q: T,
    tau_bar: T,
    settings: &BvpSettings<T>,
) -> Result<LGeodesicResult<T>> {
    let s = &settings.shoot;
    let phi0 = flow.radial(T::zero(), T::zero())?.phi;
    let grid: Vec<T> = velocity_grid(settings.v_min, settings.v_max, settings.brackets)
        .into_iter()
        .map(|v| v / phi0)
        .collect();
    let ends = grid.iter().map(|&v| endpoint(flow, v, tau_bar, s)).collect::<Result<Vec<T>>>()?;
    let mut roots = Vec::new();
    for t in target_images(model_kind(flow)?, q) {
        for k in 0..grid.len() - 1 {
            let (fa, fb) = (ends[k] - t, ends[k + 1] - t);
            if fa == T::zero() {
                roots.push(grid[k]);
            } else if fa.signum() != fb.signum() && fb != T::zero() {
                roots.push(refine(flow, t, tau_bar, (grid[k], fa), grid[k + 1], s)?);
            }
        }
        if *ends.last().unwrap() == t {
            roots.push(*grid.last().unwrap());
        }
    }
    if roots.is_empty() {
        return Err(LabError::UnreachedTarget { target: q.as_f64(), tau: tau_bar.as_f64() });
    }
    finish(flow, tau_bar, roots, s, settings.tie_tol)
}

/// Solve near a known branch: brackets the target by expanding around
/// `v_guess`. Used for stencil neighbours of an already-certified node.
pub fn solve_bvp_near<T: Real, F: Flow<T> + ?Sized>(
    flow: &F,
    q: T,
    tau_bar: T,
    v_guess: T,
    settings: &BvpSettings<T>,
) -> Result<LGeodesicResult<T>> {
    let s = &settings.shoot;
    let phi0 = flow.radial(T::zero(), T::zero())?.phi;
    let floor = settings.v_min / phi0;
    let f = |v: T| -> Result<T> { Ok(endpoint(flow, v, tau_bar, s)? - q) };
    let centre = v_guess;
    let mut width = T::lit(0.02) * centre.abs().max(floor);
    let fc = f(centre)?;
    if fc == T::zero() {
        return finish(flow, tau_bar, vec![centre], s, settings.tie_tol);
    }
    for _ in 0..40 {
        let other = if fc > T::zero() { centre - width } else { centre + width };
        let fo = f(other)?;
        if fo.signum() != fc.signum() || fo == T::zero() {
            let root = refine(flow, q, tau_bar, (centre, fc), other, s)?;
            return finish(flow, tau_bar, vec![root], s, settings.tie_tol);
        }
        width *= T::lit(2.0);
    }
    solve_bvp(flow, q, tau_bar, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{exact_flow, ExactFlow};
    use crate::lgeo::curve::{l_energy, straight_curve};

    fn sphere_l(n: f64, c: f64, rho: f64, tau: f64) -> f64 {
        let a = 2.0 * (n - 1.0);
        let big_a = (tau / c).sqrt().atan();
        (n * (tau.sqrt() - c.sqrt() * big_a) + rho * rho * a * c.sqrt() / (2.0 * big_a)) / (2.0 * tau.sqrt())
    }

    #[test]
    fn grid_shape() {
        let g = velocity_grid(1e-4_f64, 1e3, 64);
        assert_eq!(g.len(), 65);
        assert_eq!(g[32], 0.0);
        assert!((g[64] - 1e3).abs() < 1e-9 && (g[0] + 1e3).abs() < 1e-9);
    }

    #[test]
    fn flat_oracle() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let r = solve_bvp(&f, 2.0, 1.0, &BvpSettings::default()).unwrap();
        assert!((r.l() - 1.0).abs() < 1e-10);
        assert!(r.minimal && !r.tie && !r.conjugate_flag);
        let base = solve_bvp(&f, 0.0, 1.0, &BvpSettings::default()).unwrap();
        assert_eq!(base.l(), 0.0);
    }

    #[test]
    fn sphere_oracle() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 4.0).unwrap();
        let r = solve_bvp(&f, 1.0, 1.0, &BvpSettings::default()).unwrap();
        assert!((r.l() - sphere_l(3.0, 1.0, 1.0, 1.0)).abs() < 1e-9, "{}", r.l());
        let comparison = l_energy(&f, &straight_curve(1.0, 1.0, 64).unwrap()).unwrap();
        assert!(r.l_energy <= comparison);
    }

    #[test]
    fn signed_targets() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 4.0).unwrap();
        let a = solve_bvp(&f, 0.8, 1.5, &BvpSettings::default()).unwrap();
        let b = solve_bvp(&f, -0.8, 1.5, &BvpSettings::default()).unwrap();
        assert!((a.l() - b.l()).abs() < 1e-12);
        assert!((a.v + b.v).abs() < 1e-12);
    }

    #[test]
    fn continuation_agrees() {
        let f = exact_flow(ExactFlow::ShrinkingSphere { n: 3, c: 1.0_f64 }, 0.0, 4.0).unwrap();
        let s = BvpSettings::default();
        let a = solve_bvp(&f, 1.2, 1.0, &s).unwrap();
        let b = solve_bvp_near(&f, 1.25, 1.0, a.v, &s).unwrap();
        assert!((b.l() - sphere_l(3.0, 1.0, 1.25, 1.0)).abs() < 1e-9);
    }

    #[test]
    fn unreachable() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let s = BvpSettings { v_max: 1.0, ..BvpSettings::default() };
        assert!(matches!(solve_bvp(&f, 50.0, 1.0, &s), Err(LabError::UnreachedTarget { .. })));
    }
}
