use crate::scalar::Real;

/// Composite Simpson rule on uniformly spaced samples.
///
/// An odd number of intervals is closed with the 3/8 rule on the last three
/// intervals. Two samples fall back to the trapezoid rule.
pub fn simpson_uniform<T: Real>(values: &[T], h: T) -> T {
    let n = values.len();
    match n {
        0 | 1 => T::zero(),
        2 => h * (values[0] + values[1]) * T::lit(0.5),
        3 => h / T::lit(3.0) * (values[0] + T::lit(4.0) * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let (simpson_end, tail) = if intervals.is_multiple_of(2) { (n - 1, false) } else { (n - 4, true) };
            let mut total = T::zero();
            if simpson_end > 0 {
                let mut acc = values[0] + values[simpson_end];
                for (k, &v) in values.iter().enumerate().take(simpson_end).skip(1) {
                    acc += if k % 2 == 1 { T::lit(4.0) * v } else { T::lit(2.0) * v };
                }
                total = acc * h / T::lit(3.0);
            }
            if tail {
                let s = simpson_end;
                total += T::lit(3.0) * h / T::lit(8.0)
                    * (values[s] + T::lit(3.0) * values[s + 1] + T::lit(3.0) * values[s + 2] + values[s + 3]);
            }
            total
        }
    }
}

/// Composite Simpson rule for `f` on `[a, b]` with `2m` intervals.
pub fn simpson_fn<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, m: usize) -> T {
    let n = 2 * m.max(1);
    let h = (b - a) / T::from_usize_lossy(n);
    let vals: Vec<T> = (0..=n).map(|k| f(a + h * T::from_usize_lossy(k))).collect();
    simpson_uniform(&vals, h)
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T) -> T {
    fn rec<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T {
        let half = T::lit(0.5);
        let m = (a + b) * half;
        let lm = (a + m) * half;
        let rm = (m + b) * half;
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / T::lit(6.0) * (fa + T::lit(4.0) * flm + fm);
        let right = (b - m) / T::lit(6.0) * (fm + T::lit(4.0) * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
            return left + right + delta / T::lit(15.0);
        }
        rec(f, a, m, fa, flm, fm, left, tol * half, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol * half, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) * T::lit(0.5);
    let fm = f(m);
    let whole = (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_for_cubics() {
        for n in [3usize, 4, 5, 8, 11] {
            let h = 2.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|k| {
                let x = k as f64 * h;
                x * x * x - 2.0 * x + 1.0
            }).collect();
            let exact = 4.0 - 4.0 + 2.0;
            assert!((simpson_uniform(&v, h) - exact).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn adaptive_gaussian() {
        let v = adaptive_simpson(&|x: f64| (-x * x).exp(), 0.0, 8.0, 1e-12);
        assert!((v - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-11);
    }
}
