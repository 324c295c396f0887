//! Reduced-distance fields on `(r, τ)` lattices and the identity residuals.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::flow::Flow;
use crate::lgeo::bvp::{solve_bvp, solve_bvp_near, BvpSettings};
use crate::numerics::stencil::central4;
use crate::scalar::Real;

/// Lattice and stencil parameters of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec<T> {
    pub radii: Vec<T>,
    pub taus: Vec<T>,
    /// Spatial stencil step in metric units at the node.
    pub dr_metric: T,
    /// Temporal stencil step relative to `τ`.
    pub dtau_rel: T,
    pub bvp: BvpSettings<T>,
    /// When false only `l` and the endpoint gradient are computed.
    pub derivatives: bool,
}

impl<T: Real> FieldSpec<T> {
    /// Uniform lattice with `nr × nt` nodes.
    pub fn uniform(r: (T, T), tau: (T, T), nr: usize, nt: usize) -> Self {
        Self::lattice(lin(r, nr), lin(tau, nt))
    }

    pub fn lattice(radii: Vec<T>, taus: Vec<T>) -> Self {
        Self {
            radii,
            taus,
            dr_metric: T::lit(2e-2),
            dtau_rel: T::lit(2e-3),
            bvp: BvpSettings::default(),
            derivatives: true,
        }
    }

    /// Values-only lattice (no stencil solves).
    pub fn values_only(mut self) -> Self {
        self.derivatives = false;
        self
    }
}

/// `m` equally spaced points on `[a, b]`.
pub fn lin<T: Real>((a, b): (T, T), m: usize) -> Vec<T> {
    if m == 1 {
        return vec![a];
    }
    (0..m).map(|k| a + (b - a) * T::from_usize_lossy(k) / T::from_usize_lossy(m - 1)).collect()
}

/// One node of a reduced-distance field; derivatives are in metric units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldNode<T> {
    pub tau: T,
    pub r: T,
    pub l: T,
    /// `∇l` from the endpoint velocity, `φ γ'(τ̄)` (radial, orthonormal).
    pub grad_l: T,
    /// `∇l` from fourth-order differences of `l`.
    pub grad_fd: T,
    pub lap_l: T,
    pub dl_dtau: T,
    /// Radial Hessian entry `∇²l(e_r, e_r)`.
    pub hess_rad: T,
    /// Tangential Hessian entry `∇²l(e_θ, e_θ)`.
    pub hess_tan: T,
    pub scalar: T,
    pub ric_rad: T,
    pub ric_tan: T,
    /// Initial velocity of the minimal branch (coordinate units).
    pub v: T,
    pub smooth: bool,
}

/// Reduced distance `l(r, τ)` with derivatives on a lattice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReducedField<T> {
    pub n: usize,
    pub radii: Vec<T>,
    pub taus: Vec<T>,
    /// Row-major in `τ`: node `(m, j)` at `m * radii.len() + j`.
    pub nodes: Vec<FieldNode<T>>,
}

impl<T: Real> ReducedField<T> {
    pub fn node(&self, m: usize, j: usize) -> &FieldNode<T> {
        &self.nodes[m * self.radii.len() + j]
    }

    pub fn row(&self, m: usize) -> &[FieldNode<T>] {
        let w = self.radii.len();
        &self.nodes[m * w..(m + 1) * w]
    }

    /// Returns a copy with `l` and all its derivatives multiplied by `k`.
    pub fn scaled(&self, k: T) -> Self {
        let mut out = self.clone();
        for nd in &mut out.nodes {
            nd.l *= k;
            nd.grad_l *= k;
            nd.grad_fd *= k;
            nd.lap_l *= k;
            nd.dl_dtau *= k;
            nd.hess_rad *= k;
            nd.hess_tan *= k;
        }
        out
    }
}

/// Solves the node, mirroring negative radii through the pole.
fn solve_l<T: Real, F: Flow<T> + ?Sized>(flow: &F, r: T, tau: T, guess: T, s: &BvpSettings<T>) -> Result<(T, T, T)> {
    let sign = if r < T::zero() { -T::one() } else { T::one() };
    let res = solve_bvp_near(flow, r.abs(), tau, sign * guess, s)?;
    let g = flow.radial(tau, r.abs())?;
    // l_r = φ² γ'(τ̄) in coordinates.
    Ok((res.l(), sign * g.phi * g.phi * res.endpoint_velocity, sign * res.v))
}

fn node<T: Real, F: Flow<T> + ?Sized>(flow: &F, r: T, tau: T, spec: &FieldSpec<T>) -> Result<FieldNode<T>> {
    let s = &spec.bvp;
    let n = T::from_usize_lossy(flow.dimension());
    let centre = solve_bvp(flow, r, tau, s)?;
    let g = flow.radial(tau, r)?;
    let l = centre.l();
    let l_r = g.phi * g.phi * centre.endpoint_velocity;
    let v = centre.v;
    if !spec.derivatives {
        let nan = T::nan();
        return Ok(FieldNode {
            tau,
            r,
            l,
            grad_l: l_r / g.phi,
            grad_fd: nan,
            lap_l: nan,
            dl_dtau: nan,
            hess_rad: nan,
            hess_tan: nan,
            scalar: g.scalar,
            ric_rad: g.ric_rad,
            ric_tan: g.ric_tan,
            v,
            smooth: l.is_finite() && !centre.tie && !centre.conjugate_flag,
        });
    }

    let dt = spec.dtau_rel * tau;
    let lt = |k: f64| solve_l(flow, r, tau + T::lit(k) * dt, v, s).map(|x| x.0);
    let dl_dtau = central4(lt(-2.0)?, lt(-1.0)?, lt(1.0)?, lt(2.0)?, dt);

    let dr = spec.dr_metric / g.phi;
    let at = |k: f64| solve_l(flow, r + T::lit(k) * dr, tau, v, s);
    let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
    let grad_fd = central4(m2.0, m1.0, p1.0, p2.0, dr) / g.phi;
    let l_rr = central4(m2.1, m1.1, p1.1, p2.1, dr);

    let phi2 = g.phi * g.phi;
    let hess_rad = (l_rr - g.phi_r * l_r / g.phi) / phi2;
    let (hess_tan, lap_l) = if r == T::zero() {
        (hess_rad, n * l_rr / phi2)
    } else {
        let ht = g.psi_r * l_r / (g.psi * phi2);
        (ht, hess_rad + (n - T::one()) * ht)
    };
    let finite = [l, l_r, grad_fd, l_rr, dl_dtau].iter().all(|x| x.is_finite());
    Ok(FieldNode {
        tau,
        r,
        l,
        grad_l: l_r / g.phi,
        grad_fd,
        lap_l,
        dl_dtau,
        hess_rad,
        hess_tan,
        scalar: g.scalar,
        ric_rad: g.ric_rad,
        ric_tan: g.ric_tan,
        v,
        smooth: finite && !centre.tie && !centre.conjugate_flag,
    })
}

/// Solves the two-point problem at every lattice node (in parallel) and
/// assembles `l`, `∇l` (endpoint velocity), `∂_τ l` and `Δl`. Nodes whose
/// solve fails are kept with `smooth = false` and NaN values.
pub fn reduced_field<T: Real, F: Flow<T> + ?Sized>(flow: &F, spec: &FieldSpec<T>) -> Result<ReducedField<T>> {
    let (lo, hi) = flow.tau_range();
    let t_min = spec.taus.iter().cloned().fold(T::infinity(), T::min);
    let t_max = spec.taus.iter().cloned().fold(T::neg_infinity(), T::max);
    let rel = if spec.derivatives { T::lit(2.0) * spec.dtau_rel } else { T::zero() };
    let pad = T::one() + rel;
    if t_min * (T::one() - rel) <= lo || t_max * pad > hi {
        return Err(LabError::TimeRange { tau: (t_max * pad).as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
    }
    let w = spec.radii.len();
    let nodes: Vec<FieldNode<T>> = (0..w * spec.taus.len())
        .into_par_iter()
        .map(|k| {
            let (tau, r) = (spec.taus[k / w], spec.radii[k % w]);
            node(flow, r, tau, spec).unwrap_or(FieldNode {
                tau,
                r,
                l: T::nan(),
                grad_l: T::nan(),
                grad_fd: T::nan(),
                lap_l: T::nan(),
                dl_dtau: T::nan(),
                hess_rad: T::nan(),
                hess_tan: T::nan(),
                scalar: T::nan(),
                ric_rad: T::nan(),
                ric_tan: T::nan(),
                v: T::nan(),
                smooth: false,
            })
        })
        .collect();
    Ok(ReducedField { n: flow.dimension(), radii: spec.radii.clone(), taus: spec.taus.clone(), nodes })
}

/// Residuals of the three reduced-distance identities at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResidual<T> {
    pub tau: T,
    pub r: T,
    /// `2 ∂_τ l + |∇l|² − R + l/τ` (vanishes).
    pub res1: T,
    /// `∂_τ l − Δl + |∇l|² − R + n/(2τ)` (non-negative).
    pub res2: T,
    /// `2Δl − |∇l|² + R + (l − n)/τ` (non-positive).
    pub res3: T,
}

/// Identity residuals at the smooth nodes of a field.
pub fn identity_residuals<T: Real>(field: &ReducedField<T>) -> Vec<IdentityResidual<T>> {
    let n = T::from_usize_lossy(field.n);
    let two = T::lit(2.0);
    field
        .nodes
        .iter()
        .filter(|nd| nd.smooth)
        .map(|nd| {
            let g2 = nd.grad_l * nd.grad_l;
            IdentityResidual {
                tau: nd.tau,
                r: nd.r,
                res1: two * nd.dl_dtau + g2 - nd.scalar + nd.l / nd.tau,
                res2: nd.dl_dtau - nd.lap_l + g2 - nd.scalar + n / (two * nd.tau),
                res3: two * nd.lap_l - g2 + nd.scalar + (nd.l - n) / nd.tau,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{exact_flow, ExactFlow};

    #[test]
    fn gaussian_field() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let spec = FieldSpec::uniform((0.0, 2.0), (0.5, 2.0), 3, 2);
        let field = reduced_field(&f, &spec).unwrap();
        for nd in &field.nodes {
            assert!(nd.smooth);
            assert!((nd.l - nd.r * nd.r / (4.0 * nd.tau)).abs() < 1e-10);
            assert!((nd.grad_l - nd.r / (2.0 * nd.tau)).abs() < 1e-10);
        }
        for res in identity_residuals(&field) {
            assert!(res.res1.abs() < 1e-7 && res.res2.abs() < 1e-7 && res.res3.abs() < 1e-7, "{res:?}");
        }
    }

    #[test]
    fn scaled_field_breaks_first_identity() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let spec = FieldSpec::uniform((0.5, 1.5), (1.0, 1.0), 2, 1);
        let field = reduced_field(&f, &spec).unwrap().scaled(1.1);
        assert!(identity_residuals(&field).iter().any(|r| r.res1.abs() > 1e-3));
    }
}
