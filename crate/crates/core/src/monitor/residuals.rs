//! Shrinking-soliton, conjugate-heat and Perelman-`v` residuals of a stage.

use serde::Serialize;

use crate::error::Result;
use crate::flow::Flow;
use crate::lgeo::field::{FieldNode, ReducedField};
use crate::scalar::Real;

/// Residuals at one smooth node of a stage field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageResidual<T> {
    pub tau: T,
    pub r: T,
    /// Max-norm of `Ric + ∇²l − g/(2τ)` in an orthonormal frame.
    pub soliton: T,
    /// `∂_τ u − Δu + R u` for `u = (4πτ)^{−n/2} e^{−l}`.
    pub conjheat: T,
    /// `v = (τ(2Δl − |∇l|² + R) + l − n) u`.
    pub v: T,
    /// `2 ∂_τ l + |∇l|² − R + l/τ`.
    pub lll1: T,
    /// `2Δl − |∇l|² + R + (l − n)/τ`.
    pub lll2: T,
}

/// Residuals over a field; non-smooth nodes are skipped and counted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualField<T> {
    pub nodes: Vec<StageResidual<T>>,
    pub skipped: usize,
}

/// Largest magnitudes over a residual field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualMaxima<T> {
    pub soliton: T,
    pub conjheat: T,
    pub v_abs: T,
    /// Largest signed `v` (non-positive in theory).
    pub v_max: T,
    pub lll1: T,
    pub lll2: T,
}

fn heat_density<T: Real>(n: usize, tau: T, l: T) -> T {
    (T::lit(4.0) * T::PI() * tau).powf(-T::from_usize_lossy(n) / T::lit(2.0)) * (-l).exp()
}

fn soliton_entries<T: Real>(nd: &FieldNode<T>) -> (T, T) {
    let half = T::one() / (T::lit(2.0) * nd.tau);
    (nd.ric_rad + nd.hess_rad - half, nd.ric_tan + nd.hess_tan - half)
}

fn residual<T: Real>(n: usize, nd: &FieldNode<T>) -> StageResidual<T> {
    let nn = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    let g2 = nd.grad_l * nd.grad_l;
    let (a, b) = soliton_entries(nd);
    let u = heat_density(n, nd.tau, nd.l);
    let eq4 = nd.dl_dtau - nd.lap_l + g2 - nd.scalar + nn / (two * nd.tau);
    let lll2 = two * nd.lap_l - g2 + nd.scalar + (nd.l - nn) / nd.tau;
    StageResidual {
        tau: nd.tau,
        r: nd.r,
        soliton: a.abs().max(b.abs()),
        // Δu = (|∇l|² − Δl) u, ∂_τ u = −(n/(2τ) + ∂_τ l) u.
        conjheat: -eq4 * u,
        v: nd.tau * lll2 * u,
        lll1: two * nd.dl_dtau + g2 - nd.scalar + nd.l / nd.tau,
        lll2,
    }
}

/// All residuals on the smooth nodes of `field`.
pub fn stage_residuals<T: Real>(field: &ReducedField<T>) -> ResidualField<T> {
    let nodes: Vec<_> = field.nodes.iter().filter(|nd| nd.smooth).map(|nd| residual(field.n, nd)).collect();
    ResidualField { skipped: field.nodes.len() - nodes.len(), nodes }
}

impl<T: Real> ResidualField<T> {
    pub fn maxima(&self) -> ResidualMaxima<T> {
        let z = T::zero();
        let mut m = ResidualMaxima { soliton: z, conjheat: z, v_abs: z, v_max: T::neg_infinity(), lll1: z, lll2: z };
        for r in &self.nodes {
            m.soliton = m.soliton.max(r.soliton);
            m.conjheat = m.conjheat.max(r.conjheat.abs());
            m.v_abs = m.v_abs.max(r.v.abs());
            m.v_max = m.v_max.max(r.v);
            m.lll1 = m.lll1.max(r.lll1.abs());
            m.lll2 = m.lll2.max(r.lll2.abs());
        }
        m
    }
}

/// Prop 5.1 type bounds on a window: `sup l` and `sup |∂_τ l| + |∇l|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalBounds<T> {
    pub l_max: T,
    pub derivative_max: T,
}

pub fn local_bounds<T: Real>(field: &ReducedField<T>) -> LocalBounds<T> {
    field.nodes.iter().filter(|nd| nd.smooth).fold(
        LocalBounds { l_max: T::neg_infinity(), derivative_max: T::zero() },
        |b, nd| LocalBounds {
            l_max: b.l_max.max(nd.l),
            derivative_max: b.derivative_max.max(nd.dl_dtau.abs() + nd.grad_l.abs()),
        },
    )
}

/// Evolution residual `(∂_τ − Δ + R) v + 2τ |Ric + ∇²l − g/(2τ)|² u` at
/// interior lattice nodes by second-order differences of `v` on the lattice.
/// Returns `(τ, r, residual)`; nodes with a non-smooth neighbour are skipped.
pub fn v_evolution_residual<T: Real, F: Flow<T> + ?Sized>(flow: &F, field: &ReducedField<T>) -> Result<Vec<(T, T, T)>> {
    let (nr, nt) = (field.radii.len(), field.taus.len());
    let mut out = Vec::new();
    if nr < 3 || nt < 3 {
        return Ok(out);
    }
    let n = field.n;
    let v = |m: usize, j: usize| {
        let nd = field.node(m, j);
        residual(n, nd).v
    };
    let two = T::lit(2.0);
    let hr = field.radii[1] - field.radii[0];
    let ht = field.taus[1] - field.taus[0];
    for m in 1..nt - 1 {
        for j in 1..nr - 1 {
            let nbrs = [(m, j), (m - 1, j), (m + 1, j), (m, j - 1), (m, j + 1)];
            if nbrs.iter().any(|&(a, b)| !field.node(a, b).smooth) {
                continue;
            }
            let nd = field.node(m, j);
            let g = flow.radial(nd.tau, nd.r)?;
            let vc = v(m, j);
            let v_t = (v(m + 1, j) - v(m - 1, j)) / (two * ht);
            let v_r = (v(m, j + 1) - v(m, j - 1)) / (two * hr);
            let v_rr = (v(m, j + 1) - two * vc + v(m, j - 1)) / (hr * hr);
            let phi2 = g.phi * g.phi;
            let lap = (v_rr - g.phi_r / g.phi * v_r) / phi2
                + T::from_usize_lossy(n - 1) * g.psi_r * v_r / (g.psi * phi2);
            let (a, b) = soliton_entries(nd);
            let norm2 = a * a + T::from_usize_lossy(n - 1) * b * b;
            let u = heat_density(n, nd.tau, nd.l);
            out.push((nd.tau, nd.r, v_t - lap + nd.scalar * vc + two * nd.tau * norm2 * u));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{exact_flow, ExactFlow};
    use crate::lgeo::field::{reduced_field, FieldSpec};

    #[test]
    fn gaussian_saturates_everything() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let field = reduced_field(&f, &FieldSpec::uniform((0.5, 2.0), (1.0, 1.5), 3, 3)).unwrap();
        let res = stage_residuals(&field);
        assert_eq!(res.skipped, 0);
        let m = res.maxima();
        assert!(m.soliton < 1e-8 && m.conjheat < 1e-6 && m.v_abs < 1e-6, "{m:?}");
        assert!(m.lll1 < 1e-6 && m.lll2 < 1e-6);
        for (_, _, e) in v_evolution_residual(&f, &field).unwrap() {
            assert!(e.abs() < 1e-6);
        }
    }

    #[test]
    fn doubled_l_is_detected() {
        let f = exact_flow(ExactFlow::<f64>::GaussianStatic { n: 3 }, 0.0, 4.0).unwrap();
        let field = reduced_field(&f, &FieldSpec::uniform((0.5, 1.0), (1.0, 1.0), 2, 1)).unwrap().scaled(2.0);
        let m = stage_residuals(&field).maxima();
        assert!(m.soliton > 0.1, "{m:?}");
    }
}
