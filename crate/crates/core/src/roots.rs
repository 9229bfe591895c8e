//! Scalar bracketing solvers shared by the N-function, norm and duality code.

use crate::{Error, Result};

/// Iteration cap for every bracketing loop in this module.
pub const MAX_ITER: usize = 200;

/// Largest `t ≥ 0` with `f(t) ≤ level`, for a nondecreasing `f` with `f(0) = 0`
/// and `f(t) → ∞`.
///
/// This is the generalized (right-continuous) inverse used for
/// complementary densities: on a plateau of `f` it returns the right end.
pub fn sup_below<F: Fn(f64) -> f64>(f: F, level: f64) -> f64 {
    if level.is_nan() {
        return f64::NAN;
    }
    if level <= 0.0 {
        // f(t) > 0 for t > 0
        return 0.0;
    }
    if level.is_infinite() {
        return f64::INFINITY;
    }
    // Bracket: f(lo) <= level < f(hi).
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    if f(hi) <= level {
        lo = hi;
        while f(hi) <= level {
            lo = hi;
            hi *= 2.0;
            if !hi.is_finite() {
                return f64::INFINITY;
            }
        }
    } else {
        // keep relative precision for small answers
        let mut t = 0.5;
        while t > f64::MIN_POSITIVE {
            if f(t) <= level {
                lo = t;
                break;
            }
            hi = t;
            t *= 0.5;
        }
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `f(t) = y` for a continuous strictly increasing `f` on `[0, ∞)`
/// with `f(0) = 0`, using bisection accelerated by Newton steps.
///
/// `df` is the (right) derivative; a Newton step that leaves the current
/// bracket or stalls falls back to bisection. Returns the root and the
/// number of iterations used.
pub fn invert_increasing<F, D>(f: F, df: D, y: f64) -> Result<(f64, usize)>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("cannot invert at {y}")));
    }
    if y == 0.0 {
        return Ok((0.0, 0));
    }
    if y.is_infinite() {
        return Ok((f64::INFINITY, 0));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    let mut iters = 0;
    while f(hi) < y {
        lo = hi;
        hi *= 2.0;
        iters += 1;
        if !hi.is_finite() || iters > 2 * MAX_ITER {
            return Err(Error::NoConvergence(format!("no upper bracket for y = {y}")));
        }
    }
    if lo == 0.0 {
        while hi > f64::MIN_POSITIVE && f(0.5 * hi) >= y {
            hi *= 0.5;
            iters += 1;
        }
        lo = 0.5 * hi;
    }
    let tol = f64::EPSILON * y.max(f64::MIN_POSITIVE);
    let mut t = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        iters += 1;
        let r = f(t) - y;
        if r.abs() <= tol {
            return Ok((t, iters));
        }
        if r < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= 2.0 * f64::EPSILON * hi {
            break;
        }
        let d = df(t);
        let newton = t - r / d;
        t = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    // bracket collapsed; pick the endpoint with smaller residual
    let (rl, rh) = ((f(lo) - y).abs(), (f(hi) - y).abs());
    Ok((if rl < rh { lo } else { hi }, iters))
}

/// Golden-section minimization of a unimodal `g` on `[a, b]`, stopping when
/// the bracket width falls below `tol`. Returns `(argmin, min)`.
pub fn golden_section<G: Fn(f64) -> f64>(g: G, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..MAX_ITER {
        if (b - a).abs() <= tol {
            break;
        }
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    if gc <= gd {
        (c, gc)
    } else {
        (d, gd)
    }
}

/// Expands a bracket `[a, c]` around a minimum of the unimodal `g`, starting
/// from `x0` with initial step `step`. Used before [`golden_section`].
pub fn bracket_minimum<G: Fn(f64) -> f64>(g: &G, x0: f64, step: f64) -> (f64, f64) {
    let f0 = g(x0);
    let (fl, fr) = (g(x0 - step), g(x0 + step));
    if fl >= f0 && fr >= f0 {
        return (x0 - step, x0 + step);
    }
    // walk downhill, doubling the step
    let dir = if fl < fr { -1.0 } else { 1.0 };
    let mut prev = x0;
    let mut cur = x0 + dir * step;
    let mut fcur = if dir < 0.0 { fl } else { fr };
    let mut h = step;
    for _ in 0..MAX_ITER {
        h *= 2.0;
        let next = cur + dir * h;
        let fnext = g(next);
        if !(fnext < fcur) {
            return if dir < 0.0 { (next, prev) } else { (prev, next) };
        }
        prev = cur;
        cur = next;
        fcur = fnext;
    }
    if dir < 0.0 {
        (cur, prev)
    } else {
        (prev, cur)
    }
}
