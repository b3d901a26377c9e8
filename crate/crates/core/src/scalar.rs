//! Scalar abstraction for the analytic parts of the crate.
//!
//! Tree recursions, fixed points, control functions and the closed-form bound
//! evaluators are written against [`Real`] so they run in `f32` or `f64`.
//! The enumeration oracle and the samplers are `f64` only.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating point scalar usable by the generic routines.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Panics only if the target cannot represent
    /// finite `f64` values, which never happens for `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in scalar")
    }

    /// Relative tolerance used by bisection loops.
    #[inline]
    fn bisection_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(4.0))
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Bisection for a root of a continuous `g` on `[lo, hi]` where `g(lo)` and
/// `g(hi)` have opposite signs. Runs until the bracket stops shrinking or is
/// below `tol` relative to its midpoint.
pub fn bisect<T: Real>(mut lo: T, mut hi: T, tol: T, mut g: impl FnMut(T) -> T) -> T {
    let two = T::lit(2.0);
    let g_lo = g(lo);
    if g_lo == T::zero() {
        return lo;
    }
    if g(hi) == T::zero() {
        return hi;
    }
    let g_lo_pos = g_lo > T::zero();
    for _ in 0..400 {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            break;
        }
        if (hi - lo) <= tol * mid.abs().max(T::min_positive_value()) {
            break;
        }
        let gm = g(mid);
        if gm == T::zero() {
            return mid;
        }
        if (gm > T::zero()) == g_lo_pos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / two
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn integrate<T: Real>(a: T, b: T, tol: T, f: &impl Fn(T) -> T) -> T {
    if b <= a {
        return T::zero();
    }
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / T::lit(6.0) * (fa + T::lit(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive<T: Real>(
    f: &impl Fn(T) -> T,
    a: T,
    b: T,
    fa: T,
    fm: T,
    fb: T,
    whole: T,
    tol: T,
    depth: u32,
) -> T {
    let two = T::lit(2.0);
    let m = (a + b) / two;
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let (flm, frm) = (f(lm), f(rm));
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= T::lit(15.0) * tol {
        return left + right + delta / T::lit(15.0);
    }
    adaptive(f, a, m, fa, flm, fm, left, tol / two, depth - 1)
        + adaptive(f, m, b, fm, frm, fb, right, tol / two, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two() {
        let r: f64 = bisect(0.0, 2.0, 1e-14, |x| x * x - 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-12);
        let r32: f32 = bisect(0.0, 2.0, f32::bisection_tol(), |x| x * x - 2.0);
        assert!((r32 - 2f32.sqrt()).abs() < 1e-5);
    }

    #[test]
    fn simpson_integrates_log_derivative() {
        let v: f64 = integrate(1.0, 5.0, 1e-12, &|s: f64| 1.0 / s);
        assert!((v - 5f64.ln()).abs() < 1e-10);
    }
}
