use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used throughout the crate: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Copy
    + Send
    + Sync
    + Default
    + Debug
    + Display
    + 'static
{
    /// Converts an `f64` literal. Panics only if the target type cannot hold it,
    /// which does not happen for the finite constants used here.
    #[inline(always)]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline(always)]
    fn from_usize_lossy(k: usize) -> Self {
        Self::from_usize(k).expect("index fits in float")
    }

    #[inline(always)]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Area of the unit sphere S^{k}: 2π^{(k+1)/2} / Γ((k+1)/2).
pub fn unit_sphere_area<T: Real>(k: usize) -> T {
    // Γ at half-integers by recursion; k is small.
    let m = k + 1;
    let half_gamma = |m: usize| -> f64 {
        // Γ(m/2)
        if m.is_multiple_of(2) {
            (1..m / 2).map(|j| j as f64).product::<f64>()
        } else {
            let mut g = std::f64::consts::PI.sqrt();
            let mut x = 0.5;
            while x + 1.0 <= m as f64 / 2.0 + 1e-12 {
                g *= x;
                x += 1.0;
            }
            g
        }
    };
    let area = 2.0 * std::f64::consts::PI.powf(m as f64 / 2.0) / half_gamma(m);
    T::lit(area)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        let pi = std::f64::consts::PI;
        assert!((unit_sphere_area::<f64>(0) - 2.0).abs() < 1e-14);
        assert!((unit_sphere_area::<f64>(1) - 2.0 * pi).abs() < 1e-13);
        assert!((unit_sphere_area::<f64>(2) - 4.0 * pi).abs() < 1e-13);
        assert!((unit_sphere_area::<f64>(3) - 2.0 * pi * pi).abs() < 1e-12);
        assert!((unit_sphere_area::<f64>(4) - 8.0 * pi * pi / 3.0).abs() < 1e-12);
    }
}
