//! Extrapolated limit of stage reduced volumes.

use serde::Serialize;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityVerdict {
    Converged,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityLimit<T> {
    /// Intercept of `V_i = V_∞ + b / √τ_i` over the last three stages.
    pub v_inf: T,
    pub slope: T,
    /// Largest deviation of the last three stages from the fit.
    pub fit_residual: T,
    /// `|V_∞ − 1| ≤ tol`: the static Euclidean signature.
    pub static_euclidean: bool,
    /// Density of the limit soliton when known, and `V_∞` minus it.
    pub limit_density: Option<T>,
    pub fatou_gap: Option<T>,
    pub verdict: DensityVerdict,
}

/// `V_∞` from `(τ_i, V_i)` pairs ordered by stage. Fewer than three stages,
/// a poor fit, or a value outside `(0, 1 + tol]` give an inconclusive verdict.
pub fn gaussian_density_limit<T: Real>(stages: &[(T, T)], limit_density: Option<T>, tol: T) -> DensityLimit<T> {
    let inconclusive = |v: T| DensityLimit {
        v_inf: v,
        slope: T::nan(),
        fit_residual: T::nan(),
        static_euclidean: false,
        limit_density,
        fatou_gap: None,
        verdict: DensityVerdict::Inconclusive,
    };
    if stages.len() < 3 {
        return inconclusive(stages.last().map(|s| s.1).unwrap_or(T::nan()));
    }
    let last = &stages[stages.len() - 3..];
    let xs: Vec<T> = last.iter().map(|s| T::one() / s.0.sqrt()).collect();
    let ys: Vec<T> = last.iter().map(|s| s.1).collect();
    let k = T::lit(3.0);
    let mx = xs.iter().fold(T::zero(), |a, &x| a + x) / k;
    let my = ys.iter().fold(T::zero(), |a, &y| a + y) / k;
    let sxx = xs.iter().fold(T::zero(), |a, &x| a + (x - mx) * (x - mx));
    let sxy = xs.iter().zip(&ys).fold(T::zero(), |a, (&x, &y)| a + (x - mx) * (y - my));
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let v_inf = my - slope * mx;
    let fit_residual = xs.iter().zip(&ys).fold(T::zero(), |a, (&x, &y)| a.max((v_inf + slope * x - y).abs()));
    let ok = v_inf.is_finite() && v_inf > T::zero() && v_inf <= T::one() + tol && fit_residual <= tol;
    if !ok {
        return inconclusive(v_inf);
    }
    DensityLimit {
        v_inf,
        slope,
        fit_residual,
        static_euclidean: (v_inf - T::one()).abs() <= tol,
        limit_density,
        fatou_gap: limit_density.map(|d| v_inf - d),
        verdict: DensityVerdict::Converged,
    }
}

/// Density `(4πτ)^{−n/2} ∫ e^{−n/2} dV` of the round shrinker with
/// `Ric = g/(2τ)`, in closed form.
pub fn round_shrinker_density<T: Real>(n: usize) -> T {
    let nn = T::from_usize_lossy(n);
    let radius2 = T::lit(2.0) * (nn - T::one());
    let area = crate::scalar::unit_sphere_area::<T>(n);
    (T::lit(4.0) * T::PI()).powf(-nn / T::lit(2.0)) * radius2.powf(nn / T::lit(2.0)) * area * (-nn / T::lit(2.0)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_sequence() {
        let d = gaussian_density_limit(&[(3.0, 1.0), (15.0, 1.0), (63.0, 1.0_f64)], None, 1e-3);
        assert_eq!(d.verdict, DensityVerdict::Converged);
        assert!(d.static_euclidean && (d.v_inf - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recovers_intercept() {
        let pts: Vec<(f64, f64)> = [10.0, 100.0, 1000.0].iter().map(|&t: &f64| (t, 0.7 + 0.2 / t.sqrt())).collect();
        let d = gaussian_density_limit(&pts, Some(0.7), 1e-6);
        assert!((d.v_inf - 0.7).abs() < 1e-12 && !d.static_euclidean);
        assert!(d.fatou_gap.unwrap().abs() < 1e-12);
    }

    #[test]
    fn two_stages_inconclusive() {
        let d = gaussian_density_limit(&[(3.0, 1.0), (15.0, 1.0_f64)], None, 1e-3);
        assert_eq!(d.verdict, DensityVerdict::Inconclusive);
    }

    #[test]
    fn round_density_in_unit_interval() {
        // n = 3: 2√π e^{−3/2}.
        let d: f64 = round_shrinker_density(3);
        assert!((d - 2.0 * std::f64::consts::PI.sqrt() * (-1.5f64).exp()).abs() < 1e-12);
    }
}
