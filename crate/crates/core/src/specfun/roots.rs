//! Bracketed scalar root finding.
//!
//! [`find_root`] is a bisection-safeguarded secant iteration: the secant
//! step is taken whenever it lands inside the current bracket and shrinks
//! it adequately, otherwise the step falls back to bisection. Convergence
//! is therefore never slower than bisection while smooth roots converge
//! superlinearly.

use crate::error::{Error, Result};

/// Find a root of `f` inside `[lo, hi]` to absolute bracket width `tol`.
///
/// Requires `f(lo)` and `f(hi)` to have opposite signs (an endpoint that is
/// already an exact zero is returned directly); otherwise
/// [`Error::Bracket`] is raised.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
        return Err(Error::Domain(format!("invalid bracket [{lo}, {hi}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("root tolerance must be positive, got {tol}")));
    }
    let mut a = lo;
    let mut b = hi;
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "no sign change on [{lo}, {hi}]: f(lo) = {fa}, f(hi) = {fb}"
        )));
    }
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        // secant proposal from the bracket endpoints
        let mut x = b - fb * (b - a) / (fb - fa);
        let margin = 0.01 * (b - a);
        if !x.is_finite() || x <= a + margin || x >= b - margin {
            x = 0.5 * (a + b); // bisect when secant stalls near an endpoint
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Ok(0.5 * (a + b))
}
