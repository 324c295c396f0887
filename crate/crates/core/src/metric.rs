//! Symmetric model metrics and their curvature.
//!
//! Every model is a warped product `φ(r)² dr² + ψ(r)² g_{S^{n-1}}` written in a
//! radial coordinate `r` centred at a pole:
//!
//! * `HomogeneousFlat`: `φ = 1, ψ = r` (Euclidean space in polar form),
//! * `HomogeneousRound`: `φ = 1, ψ = sin r` (unit round sphere, `r` the polar angle),
//! * `RotSymPlane`: a sampled profile on a uniform grid `r_j = j h`.
//!
//! A [`MetricSnapshot`] multiplies the model by a positive scale `κ` and, for
//! sampled profiles, pulls it back by the dilation `r ↦ μ r`. Both operations
//! are exact, so spliced and rescaled flows never resample a profile.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::numerics::stencil::lagrange4;
use crate::scalar::Real;

/// How the evolution closes the radial grid at `r_J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterBoundary<T> {
    /// Second-order one-sided stencils (used for curvature evaluation).
    OneSided,
    /// Ghost node that freezes `ψ_r(r_J)` at the given value and mirrors `φ`.
    FrozenSlope(T),
}

/// Sampled warped-product profile on a uniform radial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile<T> {
    n: usize,
    h: T,
    psi: Vec<T>,
    phi: Vec<T>,
    derived: Derived<T>,
}

/// Stencil-derived quantities at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct Derived<T> {
    pub psi_x: Vec<T>,
    pub phi_x: Vec<T>,
    pub ric_rad: Vec<T>,
    pub ric_tan: Vec<T>,
    pub scalar: Vec<T>,
    pub d_scalar: Vec<T>,
    pub k_rad: Vec<T>,
    pub k_tan: Vec<T>,
}

/// Minimum number of grid nodes (the one-sided closures need four).
pub const MIN_NODES: usize = 5;

/// Curvature of `φ² dr² + ψ² g_S` on a uniform grid.
///
/// Interior nodes use fourth-order central differences, reaching across
/// `r = 0` through the parity extension `ψ(−r) = −ψ(r)`, `φ(−r) = φ(r)`; the
/// node next to `r_J` and `r_J` itself use second-order stencils. The fourth
/// order matters near the pole, where `(1 − ψ_r²)/ψ²` divides an `O(h^p)`
/// slope error by `r²`. Curvature at the pole is the even extrapolation
/// `(4 v₁ − v₂)/3` of the neighbouring values.
pub fn derive_curvature<T: Real>(
    psi: &[T],
    phi: &[T],
    h: T,
    n: usize,
    boundary: OuterBoundary<T>,
) -> Result<Derived<T>> {
    let len = psi.len();
    if len < MIN_NODES || phi.len() != len {
        return Err(LabError::Parameter(format!("profile needs >= {MIN_NODES} nodes with matching φ")));
    }
    let last = len - 1;
    let two = T::lit(2.0);
    let h2 = h * h;
    let nm1 = T::from_usize_lossy(n - 1);
    let nm2 = T::from_usize_lossy(n - 2);

    // Parity ghosts: ψ odd, φ even across r = 0.
    let ext = |v: &[T], j: isize, odd: bool| -> T {
        if j >= 0 {
            v[j as usize]
        } else if odd {
            -v[(-j) as usize]
        } else {
            v[(-j) as usize]
        }
    };
    let twelve = T::lit(12.0);
    let d1 = |v: &[T], j: usize, odd: bool| -> T {
        let i = j as isize;
        if j + 2 <= last {
            (ext(v, i - 2, odd) - T::lit(8.0) * ext(v, i - 1, odd) + T::lit(8.0) * v[j + 1] - v[j + 2]) / (twelve * h)
        } else {
            (v[j + 1] - v[j - 1]) / (two * h)
        }
    };
    let d2 = |v: &[T], j: usize, odd: bool| -> T {
        let i = j as isize;
        if j + 2 <= last {
            (-ext(v, i - 2, odd) + T::lit(16.0) * ext(v, i - 1, odd) - T::lit(30.0) * v[j]
                + T::lit(16.0) * v[j + 1]
                - v[j + 2])
                / (twelve * h2)
        } else {
            (v[j + 1] - two * v[j] + v[j - 1]) / h2
        }
    };
    let mut psi_x = vec![T::zero(); len];
    let mut psi_xx = vec![T::zero(); len];
    let mut phi_x = vec![T::zero(); len];
    for j in 1..last {
        psi_x[j] = d1(psi, j, true);
        psi_xx[j] = d2(psi, j, true);
        phi_x[j] = d1(phi, j, false);
    }
    psi_x[0] = (T::lit(8.0) * psi[1] - psi[2]) / (T::lit(6.0) * h);
    match boundary {
        OuterBoundary::OneSided => {
            let (a, b, c, d) = (psi[last], psi[last - 1], psi[last - 2], psi[last - 3]);
            psi_x[last] = (T::lit(3.0) * a - T::lit(4.0) * b + c) / (two * h);
            psi_xx[last] = (two * a - T::lit(5.0) * b + T::lit(4.0) * c - d) / h2;
            phi_x[last] =
                (T::lit(3.0) * phi[last] - T::lit(4.0) * phi[last - 1] + phi[last - 2]) / (two * h);
        }
        OuterBoundary::FrozenSlope(slope) => {
            let ghost = psi[last - 1] + two * h * slope;
            psi_x[last] = slope;
            psi_xx[last] = (ghost - two * psi[last] + psi[last - 1]) / h2;
            phi_x[last] = T::zero();
        }
    }

    let mut ric_rad = vec![T::zero(); len];
    let mut ric_tan = vec![T::zero(); len];
    let mut k_rad = vec![T::zero(); len];
    let mut k_tan = vec![T::zero(); len];
    for j in 1..len {
        if !(psi[j] > T::zero()) || !(phi[j] > T::zero()) {
            return Err(LabError::DegenerateMetric(format!("non-positive warp at node {j}")));
        }
        let ps = psi_x[j] / phi[j];
        let pss = (psi_xx[j] - phi_x[j] * psi_x[j] / phi[j]) / (phi[j] * phi[j]);
        k_rad[j] = -pss / psi[j];
        k_tan[j] = (T::one() - ps * ps) / (psi[j] * psi[j]);
        ric_rad[j] = nm1 * k_rad[j];
        ric_tan[j] = k_rad[j] + nm2 * k_tan[j];
    }
    let pole = |v: &mut Vec<T>| v[0] = (T::lit(4.0) * v[1] - v[2]) / T::lit(3.0);
    pole(&mut ric_rad);
    pole(&mut ric_tan);
    pole(&mut k_rad);
    pole(&mut k_tan);
    let scalar: Vec<T> = ric_rad.iter().zip(&ric_tan).map(|(&a, &b)| a + nm1 * b).collect();

    let mut d_scalar = vec![T::zero(); len];
    for j in 1..last {
        d_scalar[j] = (scalar[j + 1] - scalar[j - 1]) / (two * h);
    }
    d_scalar[last] =
        (T::lit(3.0) * scalar[last] - T::lit(4.0) * scalar[last - 1] + scalar[last - 2]) / (two * h);

    Ok(Derived { psi_x, phi_x, ric_rad, ric_tan, scalar, d_scalar, k_rad, k_tan })
}

impl<T: Real> Profile<T> {
    /// Builds a profile with `φ ≡ 1` from warp radii `ψ_j` on `r_j = j h`.
    pub fn new(n: usize, h: T, psi: Vec<T>) -> Result<Self> {
        let phi = vec![T::one(); psi.len()];
        Self::with_stretch(n, h, psi, phi)
    }

    /// Builds a profile with explicit radial stretch `φ_j`.
    pub fn with_stretch(n: usize, h: T, psi: Vec<T>, phi: Vec<T>) -> Result<Self> {
        if n < 2 {
            return Err(LabError::Parameter(format!("dimension n = {n} < 2")));
        }
        if !(h > T::zero()) {
            return Err(LabError::Parameter("grid spacing must be positive".into()));
        }
        if psi.len() < MIN_NODES {
            return Err(LabError::Parameter(format!("profile needs >= {MIN_NODES} nodes")));
        }
        let closure_tol = (h * h).max(T::lit(1e-9));
        if psi[0].abs() > closure_tol {
            return Err(LabError::Parameter(format!("ψ(0) = {} is not 0", psi[0])));
        }
        let slope = psi[1] / (h * phi[0]);
        if (slope - T::one()).abs() > closure_tol {
            return Err(LabError::Parameter(format!("ψ_r(0) = {slope} is not 1 (no smooth closure)")));
        }
        let mut psi = psi;
        psi[0] = T::zero();
        let derived = derive_curvature(&psi, &phi, h, n, OuterBoundary::OneSided)?;
        Ok(Self { n, h, psi, phi, derived })
    }

    /// Profile state produced by an evolution: positivity is checked, the
    /// closure at the pole is not (it is carried by the flow), and the outer
    /// node uses the evolution's boundary closure.
    pub fn evolved(n: usize, h: T, psi: Vec<T>, phi: Vec<T>, boundary: OuterBoundary<T>) -> Result<Self> {
        let derived = derive_curvature(&psi, &phi, h, n, boundary)?;
        Ok(Self { n, h, psi, phi, derived })
    }

    /// Samples `ψ` on `J + 1` nodes of spacing `h`.
    pub fn sample<F: Fn(T) -> T>(n: usize, h: T, nodes: usize, psi: F) -> Result<Self> {
        let v = (0..nodes).map(|j| psi(h * T::from_usize_lossy(j))).collect();
        Self::new(n, h, v)
    }

    /// Reads a two-column CSV with header `r,psi`.
    pub fn from_csv(n: usize, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| LabError::Parse("empty profile CSV".into()))?;
        if header.trim().replace(' ', "") != "r,psi" {
            return Err(LabError::Parse(format!("expected header `r,psi`, got `{header}`")));
        }
        let mut rs = Vec::new();
        let mut psi = Vec::new();
        for (k, line) in lines.enumerate() {
            let mut it = line.split(',');
            let mut next = |name: &str| -> Result<T> {
                let s = it.next().ok_or_else(|| LabError::Parse(format!("row {k}: missing {name}")))?;
                let v: f64 = s.trim().parse().map_err(|_| LabError::Parse(format!("row {k}: bad {name} `{s}`")))?;
                Ok(T::lit(v))
            };
            rs.push(next("r")?);
            psi.push(next("psi")?);
        }
        if rs.len() < MIN_NODES {
            return Err(LabError::Parse(format!("profile CSV needs >= {MIN_NODES} rows")));
        }
        let h = rs[1] - rs[0];
        let tol = h * T::lit(1e-6);
        for (j, &r) in rs.iter().enumerate() {
            if (r - h * T::from_usize_lossy(j)).abs() > tol {
                return Err(LabError::Parse(format!("non-uniform radial grid at row {j}")));
            }
        }
        Self::new(n, h, psi)
    }

    pub fn dimension(&self) -> usize {
        self.n
    }
    pub fn spacing(&self) -> T {
        self.h
    }
    pub fn nodes(&self) -> usize {
        self.psi.len()
    }
    pub fn psi(&self) -> &[T] {
        &self.psi
    }
    pub fn phi(&self) -> &[T] {
        &self.phi
    }
    pub fn derived(&self) -> &Derived<T> {
        &self.derived
    }
    pub fn r_max(&self) -> T {
        self.h * T::from_usize_lossy(self.psi.len() - 1)
    }
    pub fn radius(&self, j: usize) -> T {
        self.h * T::from_usize_lossy(j)
    }

    /// Local geometry at coordinate `x` (signed; negative values use parity).
    fn local(&self, x: T) -> Result<RadialGeometry<T>> {
        let ax = x.abs();
        let r_max = self.r_max();
        if ax > r_max * (T::one() + T::lit(1e-12)) {
            return Err(LabError::Domain { r: x.as_f64(), max: r_max.as_f64() });
        }
        let last = self.psi.len() - 1;
        let pos = (ax / self.h).min(T::from_usize_lossy(last));
        let j = pos.floor().to_usize().unwrap_or(0).min(last);
        let at_node = (pos - T::from_usize_lossy(j)).abs() <= T::lit(1e-12);
        let d = &self.derived;
        let pick = |v: &[T]| -> T {
            if at_node {
                return v[j];
            }
            let start = j.saturating_sub(1).min(last - 3);
            let xs = [0, 1, 2, 3].map(|k| self.radius(start + k));
            let ys = [0, 1, 2, 3].map(|k| v[start + k]);
            lagrange4(ax, xs, ys)
        };
        let odd = if x < T::zero() { -T::one() } else { T::one() };
        Ok(RadialGeometry {
            phi: pick(&self.phi),
            phi_r: odd * pick(&d.phi_x),
            psi: odd * pick(&self.psi),
            psi_r: pick(&d.psi_x),
            scalar: pick(&d.scalar),
            d_scalar_dr: odd * pick(&d.d_scalar),
            ric_rad: pick(&d.ric_rad),
            ric_tan: pick(&d.ric_tan),
            k_rad: pick(&d.k_rad),
            k_tan: pick(&d.k_tan),
        })
    }
}

/// Model class of a metric.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelGeometry<T> {
    HomogeneousRound { n: usize },
    HomogeneousFlat { n: usize },
    RotSymPlane { profile: Arc<Profile<T>> },
}

/// Coarse model label, used for dispatch and reporting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Round,
    Flat,
    RotSym,
}

impl<T: Real> ModelGeometry<T> {
    pub fn dimension(&self) -> usize {
        match self {
            Self::HomogeneousRound { n } | Self::HomogeneousFlat { n } => *n,
            Self::RotSymPlane { profile } => profile.dimension(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Self::HomogeneousRound { .. } => ModelKind::Round,
            Self::HomogeneousFlat { .. } => ModelKind::Flat,
            Self::RotSymPlane { .. } => ModelKind::RotSym,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension() < 2 {
            return Err(LabError::Parameter(format!("dimension n = {} < 2", self.dimension())));
        }
        Ok(())
    }
}

/// Geometry of `φ² dr² + ψ² g_S` at one radius, with curvature in an
/// orthonormal frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGeometry<T> {
    pub phi: T,
    pub phi_r: T,
    pub psi: T,
    pub psi_r: T,
    pub scalar: T,
    pub d_scalar_dr: T,
    pub ric_rad: T,
    pub ric_tan: T,
    /// Sectional curvature of radial planes.
    pub k_rad: T,
    /// Sectional curvature of planes tangent to the spheres.
    pub k_tan: T,
}

impl<T: Real> RadialGeometry<T> {
    /// Largest sectional-curvature magnitude, a proxy for `|Rm|`.
    pub fn rm_norm(&self) -> T {
        self.k_rad.abs().max(self.k_tan.abs())
    }
}

/// Curvature components at a point of a snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvatureSample<T> {
    pub scalar: T,
    pub ric_rad: T,
    pub ric_tan: T,
    pub d_scalar_dr: T,
    pub r: T,
    pub tau: T,
}

/// A metric at one backward time: `κ · (dilation_μ)^* model`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSnapshot<T> {
    pub tau: T,
    pub geometry: ModelGeometry<T>,
    /// Metric scale `κ > 0` (area units).
    pub scale: T,
    /// Coordinate dilation `μ > 0`; always 1 for homogeneous models.
    pub dilation: T,
}

impl<T: Real> MetricSnapshot<T> {
    pub fn new(tau: T, geometry: ModelGeometry<T>, scale: T) -> Result<Self> {
        geometry.validate()?;
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(LabError::DegenerateMetric(format!("scale {scale} is not positive")));
        }
        Ok(Self { tau, geometry, scale, dilation: T::one() })
    }

    pub fn dimension(&self) -> usize {
        self.geometry.dimension()
    }

    /// The metric `factor · (x ↦ μ x)^* self`.
    pub fn pulled_back(&self, factor: T, mu: T) -> Result<Self> {
        if !(factor > T::zero()) || !(mu > T::zero()) {
            return Err(LabError::Parameter("pullback factors must be positive".into()));
        }
        let mut out = self.clone();
        match self.geometry {
            ModelGeometry::HomogeneousFlat { .. } => out.scale = self.scale * factor * mu * mu,
            ModelGeometry::HomogeneousRound { .. } => {
                if (mu - T::one()).abs() > T::lit(1e-12) {
                    return Err(LabError::Parameter("the round sphere admits no radial dilation".into()));
                }
                out.scale = self.scale * factor;
            }
            ModelGeometry::RotSymPlane { .. } => {
                out.scale = self.scale * factor;
                out.dilation = self.dilation * mu;
            }
        }
        Ok(out)
    }

    /// Largest admissible |r| in this snapshot's coordinate, if bounded.
    pub fn coordinate_limit(&self) -> Option<T> {
        match &self.geometry {
            ModelGeometry::HomogeneousFlat { .. } => None,
            ModelGeometry::HomogeneousRound { .. } => Some(T::PI() * T::lit(2.0)),
            ModelGeometry::RotSymPlane { profile } => Some(profile.r_max() / self.dilation),
        }
    }

    /// Warped-product data and curvature at signed coordinate `r`.
    pub fn radial(&self, r: T) -> Result<RadialGeometry<T>> {
        let k = self.scale;
        let sk = k.sqrt();
        let n = self.dimension();
        match &self.geometry {
            ModelGeometry::HomogeneousFlat { .. } => Ok(RadialGeometry {
                phi: sk,
                phi_r: T::zero(),
                psi: sk * r,
                psi_r: sk,
                scalar: T::zero(),
                d_scalar_dr: T::zero(),
                ric_rad: T::zero(),
                ric_tan: T::zero(),
                k_rad: T::zero(),
                k_tan: T::zero(),
            }),
            ModelGeometry::HomogeneousRound { .. } => {
                let max = T::PI() * T::lit(2.0);
                if r.abs() > max {
                    return Err(LabError::Domain { r: r.as_f64(), max: max.as_f64() });
                }
                let sec = T::one() / k;
                let ric = T::from_usize_lossy(n - 1) * sec;
                Ok(RadialGeometry {
                    phi: sk,
                    phi_r: T::zero(),
                    psi: sk * r.sin(),
                    psi_r: sk * r.cos(),
                    scalar: T::from_usize_lossy(n) * ric,
                    d_scalar_dr: T::zero(),
                    ric_rad: ric,
                    ric_tan: ric,
                    k_rad: sec,
                    k_tan: sec,
                })
            }
            ModelGeometry::RotSymPlane { profile } => {
                let mu = self.dilation;
                let b = profile.local(mu * r)?;
                Ok(RadialGeometry {
                    phi: sk * mu * b.phi,
                    phi_r: sk * mu * mu * b.phi_r,
                    psi: sk * b.psi,
                    psi_r: sk * mu * b.psi_r,
                    scalar: b.scalar / k,
                    d_scalar_dr: b.d_scalar_dr * mu / k,
                    ric_rad: b.ric_rad / k,
                    ric_tan: b.ric_tan / k,
                    k_rad: b.k_rad / k,
                    k_tan: b.k_tan / k,
                })
            }
        }
    }

    /// Curvature components at radius `r`.
    pub fn curvature_at(&self, r: T) -> Result<CurvatureSample<T>> {
        if let ModelGeometry::RotSymPlane { profile } = &self.geometry {
            let max = profile.r_max() / self.dilation;
            if r < T::zero() || r > max * (T::one() + T::lit(1e-12)) {
                return Err(LabError::Domain { r: r.as_f64(), max: max.as_f64() });
            }
        }
        let g = self.radial(r)?;
        Ok(CurvatureSample {
            scalar: g.scalar,
            ric_rad: g.ric_rad,
            ric_tan: g.ric_tan,
            d_scalar_dr: g.d_scalar_dr,
            r,
            tau: self.tau,
        })
    }

    /// Metric components `(g_rr, g_θθ)` at the given radii, flattened; a
    /// homogeneous snapshot reports its scale once.
    pub fn components(&self, radii: &[T]) -> Result<Vec<T>> {
        match self.geometry {
            ModelGeometry::RotSymPlane { .. } => {
                let mut out = Vec::with_capacity(2 * radii.len());
                for &r in radii {
                    let g = self.radial(r)?;
                    out.push(g.phi * g.phi);
                    out.push(g.psi * g.psi);
                }
                Ok(out)
            }
            _ => Ok(vec![self.scale]),
        }
    }

    /// Riemannian distance from the pole to coordinate `r ≥ 0`.
    pub fn pole_distance(&self, r: T) -> Result<T> {
        match &self.geometry {
            ModelGeometry::RotSymPlane { .. } => {
                let m = 64usize;
                let h = r / T::from_usize_lossy(m);
                let mut vals = Vec::with_capacity(m + 1);
                for k in 0..=m {
                    vals.push(self.radial(h * T::from_usize_lossy(k))?.phi);
                }
                Ok(crate::numerics::quad::simpson_uniform(&vals, h))
            }
            _ => Ok(self.scale.sqrt() * r),
        }
    }

    /// Inverse of [`pole_distance`](Self::pole_distance).
    pub fn coordinate_at_distance(&self, d: T) -> Result<T> {
        match &self.geometry {
            ModelGeometry::RotSymPlane { .. } => {
                let limit = self.coordinate_limit().unwrap_or(T::max_value());
                let mut lo = T::zero();
                let mut hi = limit;
                if self.pole_distance(hi)? < d {
                    return Err(LabError::Domain { r: d.as_f64(), max: limit.as_f64() });
                }
                for _ in 0..80 {
                    let mid = (lo + hi) * T::lit(0.5);
                    if self.pole_distance(mid)? < d {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok((lo + hi) * T::lit(0.5))
            }
            _ => Ok(d / self.scale.sqrt()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere_profile(nodes: usize) -> Profile<f64> {
        let h = std::f64::consts::FRAC_PI_2 / (nodes - 1) as f64;
        Profile::sample(3, h, nodes, |r| r.sin()).unwrap()
    }

    #[test]
    fn flat_is_flat() {
        let s = MetricSnapshot::new(0.0, ModelGeometry::HomogeneousFlat { n: 4 }, 2.0).unwrap();
        let c = s.curvature_at(3.7).unwrap();
        assert_eq!((c.scalar, c.ric_rad, c.ric_tan, c.d_scalar_dr), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn round_scalar_curvature() {
        let s = MetricSnapshot::new(0.0, ModelGeometry::HomogeneousRound { n: 3 }, 4.0).unwrap();
        let c = s.curvature_at(0.4).unwrap();
        assert_eq!(c.scalar, 1.5);
        assert_eq!(c.ric_rad, 0.5);
        assert_eq!(c.ric_tan, 0.5);
    }

    #[test]
    fn sin_profile_is_unit_sphere() {
        let p = sphere_profile(401);
        let s = MetricSnapshot::new(0.0, ModelGeometry::RotSymPlane { profile: Arc::new(p) }, 1.0).unwrap();
        let c = s.curvature_at(std::f64::consts::FRAC_PI_4).unwrap();
        assert!((c.scalar - 6.0).abs() < 1e-4, "{}", c.scalar);
        let pole = s.curvature_at(0.0).unwrap();
        assert!((pole.scalar - 6.0).abs() < 1e-4, "{}", pole.scalar);
    }

    #[test]
    fn curvature_converges_second_order() {
        let err = |nodes| {
            let p = sphere_profile(nodes);
            let s = MetricSnapshot::new(0.0, ModelGeometry::RotSymPlane { profile: Arc::new(p) }, 1.0).unwrap();
            let mut e: f64 = 0.0;
            for r in [0.3, 0.6, 0.9, 1.2] {
                let c = s.curvature_at(r).unwrap();
                e = e.max((c.scalar - 6.0).abs()).max((c.ric_rad - 2.0).abs()).max((c.ric_tan - 2.0).abs());
            }
            e
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 3.5, "ratio {ratio}");
    }

    #[test]
    fn rejects_open_profile() {
        // ψ = 2 sin r has ψ_r(0) = 2: a cone point, not a smooth closure.
        let h = 0.01;
        assert!(Profile::<f64>::sample(3, h, 50, |r| 2.0 * r.sin()).is_err());
        assert!(Profile::<f64>::sample(1, h, 50, |r| r).is_err());
    }

    #[test]
    fn out_of_domain() {
        let p = sphere_profile(41);
        let s = MetricSnapshot::new(0.0, ModelGeometry::RotSymPlane { profile: Arc::new(p) }, 1.0).unwrap();
        assert!(matches!(s.curvature_at(2.0), Err(LabError::Domain { .. })));
    }

    #[test]
    fn degenerate_scale() {
        assert!(MetricSnapshot::new(0.0, ModelGeometry::<f64>::HomogeneousFlat { n: 2 }, 0.0).is_err());
    }

    #[test]
    fn pullback_of_flat_profile_is_exact() {
        let p = Profile::sample(3, 1.0 / 32.0, 65, |r: f64| r).unwrap();
        let s = MetricSnapshot::new(0.0, ModelGeometry::RotSymPlane { profile: Arc::new(p) }, 1.0).unwrap();
        let alpha: f64 = 0.25;
        let q = s.pulled_back(1.0 / alpha, alpha.sqrt()).unwrap();
        let g = q.radial(1.5).unwrap();
        assert!((g.phi - 1.0).abs() < 1e-14);
        assert!((g.psi - 1.5).abs() < 1e-13);
    }

    #[test]
    fn csv_ingestion() {
        let mut text = String::from("r,psi\n");
        for j in 0..20 {
            let r = j as f64 * 0.05;
            text.push_str(&format!("{r},{}\n", r.sin()));
        }
        let p = Profile::<f64>::from_csv(3, &text).unwrap();
        assert_eq!(p.nodes(), 20);
        assert!(Profile::<f64>::from_csv(3, "x,y\n0,0\n").is_err());
    }

    #[test]
    fn pole_distance_roundtrip() {
        let p = sphere_profile(81);
        let s = MetricSnapshot::new(0.0, ModelGeometry::RotSymPlane { profile: Arc::new(p) }, 4.0).unwrap();
        let d = s.pole_distance(1.0).unwrap();
        assert!((d - 2.0).abs() < 1e-8);
        assert!((s.coordinate_at_distance(d).unwrap() - 1.0).abs() < 1e-10);
    }
}
