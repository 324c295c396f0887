use crate::error::Result;
use crate::scalar::Real;

/// Bisection on a bracket `[a, b]` with `f(a)·f(b) ≤ 0`.
///
/// Stops when the bracket width falls below `xtol` or `|f| ≤ ftol`.
pub fn bisect<T, F>(mut f: F, mut a: T, mut b: T, mut fa: T, xtol: T, ftol: T, max_iter: usize) -> Result<T>
where
    T: Real,
    F: FnMut(T) -> Result<T>,
{
    if fa == T::zero() {
        return Ok(a);
    }
    for _ in 0..max_iter {
        let m = a + (b - a) * T::lit(0.5);
        let fm = f(m)?;
        if fm.abs() <= ftol || (b - a).abs() <= xtol {
            return Ok(m);
        }
        if (fm < T::zero()) == (fa < T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(a + (b - a) * T::lit(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt2() {
        let f = |x: f64| Ok(x * x - 2.0);
        let r = bisect(f, 0.0, 2.0, -2.0, 1e-14, 0.0, 200).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }
}
