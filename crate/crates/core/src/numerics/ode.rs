//! Explicit adaptive Runge–Kutta integrators.
//!
//! Two steppers live here:
//!
//! * [`Dopri`]: Dormand–Prince 5(4) with error-per-step control on fixed-size
//!   states, used for the L-geodesic shooting ODE.
//! * [`heun_euler`]: Heun–Euler 2(1) on dynamically sized states with
//!   error-per-unit-step control, used for method-of-lines flow evolution.
//!   Per-unit-step control makes the accepted step proportional to the
//!   tolerance, so downstream differencing errors shrink like `tol²`.

use crate::error::{LabError, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl<T> {
    pub rtol: T,
    pub atol: T,
    /// Largest admissible step; `None` means the whole interval.
    pub max_step: Option<T>,
}

impl<T: Real> StepControl<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Self { rtol, atol, max_step: None }
    }

    pub fn with_max_step(mut self, h: T) -> Self {
        self.max_step = Some(h);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x > T::zero() && x.is_finite();
        if !pos(self.rtol) || !pos(self.atol) || self.max_step.is_some_and(|h| !pos(h)) {
            return Err(LabError::Parameter("step tolerances must be positive and finite".into()));
        }
        Ok(())
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Dormand–Prince 5(4) integrator for `N`-dimensional first-order systems.
///
/// The integrator keeps its last accepted step size between calls to
/// [`Dopri::advance`], so marching through a list of output points costs about
/// the same as one uninterrupted integration.
#[derive(Debug, Clone)]
pub struct Dopri<T, const N: usize> {
    control: StepControl<T>,
    h: Option<T>,
    pub accepted: usize,
    pub rejected: usize,
}

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for (c, k) in terms {
        if *c == 0.0 {
            continue;
        }
        let c = T::lit(*c) * h;
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

impl<T: Real, const N: usize> Dopri<T, N> {
    pub fn new(control: StepControl<T>) -> Self {
        Self { control, h: None, accepted: 0, rejected: 0 }
    }

    /// Integrates `y' = f(t, y)` from `t0` to `t1` (`t1 > t0`), returning `y(t1)`.
    pub fn advance<F>(&mut self, f: &mut F, t0: T, y0: [T; N], t1: T) -> Result<[T; N]>
    where
        F: FnMut(T, &[T; N]) -> Result<[T; N]>,
    {
        let span = t1 - t0;
        if span <= T::zero() {
            return Ok(y0);
        }
        let hmax = self.control.max_step.map_or(span, |m| m.min(span));
        let tiny = T::epsilon() * T::lit(16.0) * t1.abs().max(T::one());
        let mut h = self.h.unwrap_or(span * T::lit(0.01)).min(hmax);
        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y)?;
        loop {
            let remaining = t1 - t;
            if remaining <= tiny {
                break;
            }
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let k2 = f(t + T::lit(0.2) * h, &axpy(&y, h, &[(A21, &k1)]))?;
            let k3 = f(t + T::lit(0.3) * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = f(t + T::lit(0.8) * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
            let k5 = f(
                t + T::lit(8.0 / 9.0) * h,
                &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = f(
                t + h,
                &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            )?;
            let y_new = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let k7 = f(t + h, &y_new)?;
            let mut err = T::zero();
            for i in 0..N {
                let e = h
                    * (T::lit(E1) * k1[i]
                        + T::lit(E3) * k3[i]
                        + T::lit(E4) * k4[i]
                        + T::lit(E5) * k5[i]
                        + T::lit(E6) * k6[i]
                        + T::lit(E7) * k7[i]);
                let sc = self.control.atol + self.control.rtol * y[i].abs().max(y_new[i].abs());
                err = err.max(e.abs() / sc);
            }
            if !err.is_finite() {
                self.rejected += 1;
                h *= T::lit(0.2);
                if h < tiny {
                    return Err(LabError::Stiffness { t: t.as_f64(), h: h.as_f64() });
                }
                continue;
            }
            let factor = if err == T::zero() {
                T::lit(5.0)
            } else {
                (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
            };
            if err <= T::one() {
                self.accepted += 1;
                t = if last { t1 } else { t + h };
                y = y_new;
                k1 = k7;
                if !last {
                    self.h = Some((h * factor).min(hmax));
                }
                h = (h * factor).min(hmax);
                if last {
                    break;
                }
            } else {
                self.rejected += 1;
                h *= factor.min(T::one());
                if h < tiny {
                    return Err(LabError::Stiffness { t: t.as_f64(), h: h.as_f64() });
                }
            }
        }
        Ok(y)
    }
}

/// One accepted sample of a method-of-lines integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub t: T,
    pub y: Vec<T>,
    /// Right-hand side evaluated at `(t, y)`.
    pub dy: Vec<T>,
}

/// Heun–Euler 2(1) with error-per-unit-step control, propagating the Heun
/// (second-order) solution. Every accepted step is recorded.
///
/// `guard` is consulted after each accepted step and may abort the
/// integration (used to detect metric degeneration).
pub fn heun_euler<T, F, G>(
    mut f: F,
    t0: T,
    y0: Vec<T>,
    t1: T,
    control: &StepControl<T>,
    mut guard: G,
) -> Result<Vec<Sample<T>>>
where
    T: Real,
    F: FnMut(T, &[T]) -> Result<Vec<T>>,
    G: FnMut(T, &[T]) -> Result<()>,
{
    control.validate()?;
    if t1 <= t0 {
        return Err(LabError::Parameter("integration end must exceed start".into()));
    }
    let span = t1 - t0;
    let hmax = control.max_step.map_or(span, |m| m.min(span));
    let tiny = T::epsilon() * T::lit(64.0) * t1.abs().max(T::one());
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y)?;
    let mut out = vec![Sample { t, y: y.clone(), dy: k1.clone() }];
    let mut h = (span * T::lit(1e-3)).min(hmax).max(tiny * T::lit(4.0));
    while t1 - t > tiny {
        let last = h >= t1 - t;
        if last {
            h = t1 - t;
        }
        let pred: Vec<T> = y.iter().zip(&k1).map(|(&yi, &ki)| yi + h * ki).collect();
        let k2 = f(t + h, &pred)?;
        let half = T::lit(0.5);
        let y_new: Vec<T> = y
            .iter()
            .zip(k1.iter().zip(&k2))
            .map(|(&yi, (&a, &b))| yi + half * h * (a + b))
            .collect();
        let mut err = T::zero();
        for i in 0..y.len() {
            let e = (y_new[i] - pred[i]).abs();
            let sc = control.atol + control.rtol * y[i].abs().max(y_new[i].abs());
            err = err.max(e / sc);
        }
        // Per-unit-step: compare against h.
        let ratio = err / h;
        if ratio.is_finite() && ratio <= T::one() {
            guard(t + h, &y_new)?;
            t = if last { t1 } else { t + h };
            y = y_new;
            k1 = f(t, &y)?;
            out.push(Sample { t, y: y.clone(), dy: k1.clone() });
            let grow = if ratio == T::zero() {
                T::lit(2.0)
            } else {
                (T::lit(0.9) / ratio).min(T::lit(2.0)).max(T::lit(0.2))
            };
            h = (h * grow).min(hmax);
        } else {
            let shrink = if ratio.is_finite() {
                (T::lit(0.9) / ratio).max(T::lit(0.1)).min(T::lit(0.9))
            } else {
                T::lit(0.1)
            };
            h *= shrink;
            if h < tiny {
                return Err(LabError::Stiffness { t: t.as_f64(), h: h.as_f64() });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dopri_exponential() {
        let mut d = Dopri::<f64, 1>::new(StepControl::new(1e-12, 1e-14));
        let y = d.advance(&mut |_t, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], 2.0).unwrap();
        assert!((y[0] - 2f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn dopri_harmonic_in_pieces_matches_single_run() {
        let mut f = |_t: f64, y: &[f64; 2]| Ok([y[1], -y[0]]);
        let mut a = Dopri::<f64, 2>::new(StepControl::new(1e-11, 1e-13));
        let mut y = [0.0, 1.0];
        let mut t = 0.0;
        for k in 1..=10 {
            let t1 = k as f64 * 0.3;
            y = a.advance(&mut f, t, y, t1).unwrap();
            t = t1;
        }
        assert!((y[0] - 3f64.sin()).abs() < 1e-9);
        assert!((y[1] - 3f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn heun_linear_is_exact() {
        let c = StepControl::new(1e-8, 1e-10);
        let s = heun_euler(|_t, _y: &[f64]| Ok(vec![4.0]), 0.0, vec![4.0], 1.0, &c, |_, _| Ok(())).unwrap();
        assert!((s.last().unwrap().y[0] - 8.0).abs() < 1e-12);
    }

    #[test]
    fn heun_step_scales_with_tolerance() {
        let run = |tol: f64| {
            let c = StepControl::new(tol, tol);
            heun_euler(|_t, y: &[f64]| Ok(vec![-y[0]]), 0.0, vec![1.0], 1.0, &c, |_, _| Ok(()))
                .unwrap()
                .len()
        };
        let n1 = run(1e-4);
        let n2 = run(5e-5);
        let ratio = n2 as f64 / n1 as f64;
        assert!(ratio > 1.7 && ratio < 2.3, "ratio {ratio}");
    }

    #[test]
    fn rejects_bad_control() {
        let c = StepControl::new(-1.0, 1e-3);
        assert!(heun_euler(|_t, y: &[f64]| Ok(y.to_vec()), 0.0, vec![1.0], 1.0, &c, |_, _| Ok(())).is_err());
    }
}
