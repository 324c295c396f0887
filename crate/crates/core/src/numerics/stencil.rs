//! Finite-difference and interpolation stencils.

use crate::error::{LabError, Result};
use crate::scalar::Real;

/// Which side of a point a one-sided stencil samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// Second-order accurate forward weights for the `k`-th derivative,
/// applied to samples at offsets `0, h, 2h, …`.
pub fn forward_weights(k: usize) -> Result<&'static [f64]> {
    match k {
        0 => Ok(&[1.0]),
        1 => Ok(&[-1.5, 2.0, -0.5]),
        2 => Ok(&[2.0, -5.0, 4.0, -1.0]),
        3 => Ok(&[-2.5, 9.0, -12.0, 7.0, -1.5]),
        _ => Err(LabError::Parameter(format!("one-sided derivative order {k} > 3"))),
    }
}

/// One-sided `k`-th derivative from samples `f(x ± j h)`, `j = 0..`, where the
/// sign is `+` for [`Side::Right`].
pub fn one_sided<T: Real>(samples: &[T], h: T, k: usize, side: Side) -> Result<T> {
    let w = forward_weights(k)?;
    if samples.len() < w.len() {
        return Err(LabError::Stencil { needed: w.len(), available: samples.len() });
    }
    let mut acc = T::zero();
    for (wj, fj) in w.iter().zip(samples) {
        acc += T::lit(*wj) * *fj;
    }
    let sign = if side == Side::Left && k % 2 == 1 { -T::one() } else { T::one() };
    Ok(sign * acc / h.powi(k as i32))
}

/// Fourth-order central first derivative.
#[inline]
pub fn central4<T: Real>(fm2: T, fm1: T, fp1: T, fp2: T, h: T) -> T {
    (fm2 - T::lit(8.0) * fm1 + T::lit(8.0) * fp1 - fp2) / (T::lit(12.0) * h)
}

/// Value and derivative at `t` of the parabola through three samples.
pub fn lagrange3<T: Real>(t: T, ts: [T; 3], ys: [T; 3]) -> (T, T) {
    let [t0, t1, t2] = ts;
    let l0 = ((t - t1) * (t - t2)) / ((t0 - t1) * (t0 - t2));
    let l1 = ((t - t0) * (t - t2)) / ((t1 - t0) * (t1 - t2));
    let l2 = ((t - t0) * (t - t1)) / ((t2 - t0) * (t2 - t1));
    let d0 = ((t - t1) + (t - t2)) / ((t0 - t1) * (t0 - t2));
    let d1 = ((t - t0) + (t - t2)) / ((t1 - t0) * (t1 - t2));
    let d2 = ((t - t0) + (t - t1)) / ((t2 - t0) * (t2 - t1));
    let [y0, y1, y2] = ys;
    (l0 * y0 + l1 * y1 + l2 * y2, d0 * y0 + d1 * y1 + d2 * y2)
}

/// Cubic Hermite interpolation on `[t0, t1]` from endpoint values and slopes.
pub fn hermite<T: Real>(t: T, t0: T, t1: T, y0: T, y1: T, d0: T, d1: T) -> T {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1
}

/// Cubic Lagrange interpolation through four points.
pub fn lagrange4<T: Real>(x: T, xs: [T; 4], ys: [T; 4]) -> T {
    let mut acc = T::zero();
    for i in 0..4 {
        let mut w = T::one();
        for j in 0..4 {
            if i != j {
                w = w * (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += w * ys[i];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_sided_exact_on_quadratics() {
        // f(x) = 3 + 2x + x^2 around x = 1: f' = 4, f'' = 2
        let f = |x: f64| 3.0 + 2.0 * x + x * x;
        let h = 0.1;
        let right: Vec<f64> = (0..5).map(|j| f(1.0 + j as f64 * h)).collect();
        let left: Vec<f64> = (0..5).map(|j| f(1.0 - j as f64 * h)).collect();
        for side in [Side::Left, Side::Right] {
            let s = if side == Side::Left { &left } else { &right };
            assert!((one_sided(s, h, 1, side).unwrap() - 4.0).abs() < 1e-12);
            assert!((one_sided(s, h, 2, side).unwrap() - 2.0).abs() < 1e-10);
            assert!(one_sided(s, h, 3, side).unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn one_sided_needs_samples() {
        assert!(matches!(one_sided(&[1.0, 2.0], 0.1, 2, Side::Right), Err(LabError::Stencil { .. })));
    }

    #[test]
    fn third_derivative_second_order() {
        let f = |x: f64| x.exp();
        let err = |h: f64| {
            let s: Vec<f64> = (0..5).map(|j| f(j as f64 * h)).collect();
            (one_sided(&s, h, 3, Side::Right).unwrap() - 1.0).abs()
        };
        let r = err(0.02) / err(0.01);
        assert!(r > 3.5 && r < 4.5, "{r}");
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |t: f64| t * t * t - t;
        let df = |t: f64| 3.0 * t * t - 1.0;
        let v = hermite(0.3, 0.0, 1.0, f(0.0), f(1.0), df(0.0), df(1.0));
        assert!((v - f(0.3)).abs() < 1e-14);
    }
}
