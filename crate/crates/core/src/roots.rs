//! Safeguarded Newton iteration on a sign-changing bracket.

const MAX_ITER: usize = 400;

/// Finds a root of the nondecreasing function `f` inside `[lo, hi]`.
///
/// `f` returns `(value, derivative)`. A Newton step is taken whenever it
/// lands strictly inside the current bracket; otherwise the bracket is
/// bisected. Iteration stops once `|value| <= f_tol`, or when the bracket
/// can no longer be split in floating point.
///
/// Callers guarantee `f(lo) <= 0 <= f(hi)`.
pub(crate) fn newton_bisect<F>(mut f: F, mut lo: f64, mut hi: f64, start: f64, f_tol: f64) -> f64
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = if start > lo && start < hi { start } else { 0.5 * (lo + hi) };
    for _ in 0..MAX_ITER {
        let (fx, dfx) = f(x);
        if fx == 0.0 || fx.abs() <= f_tol {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return x;
        }
        let newton = x - fx / dfx;
        x = if dfx > 0.0 && newton.is_finite() && newton > lo && newton < hi { newton } else { mid };
    }
    x
}
