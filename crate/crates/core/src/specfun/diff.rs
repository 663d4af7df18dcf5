//! Finite-difference derivatives of callables, orders 1 through 3.
//!
//! All stencils are centered 5-point rules:
//!
//! ```text
//! f'(x)   ~ [f(x-2h) - 8 f(x-h) + 8 f(x+h) - f(x+2h)] / (12 h)        O(h^4)
//! f''(x)  ~ [-f(x-2h) + 16 f(x-h) - 30 f(x) + 16 f(x+h) - f(x+2h)] / (12 h^2)   O(h^4)
//! f'''(x) ~ [-f(x-2h) + 2 f(x-h) - 2 f(x+h) + f(x+2h)] / (2 h^3)     O(h^2)
//! ```
//!
//! Each estimate is Richardson-extrapolated from steps h and h/2, which
//! raises the order by the width of the leading error term and yields a
//! usable error estimate (the gap between the extrapolated and the finer
//! plain value).
//!
//! The automatic step sizes balance truncation against roundoff per order:
//! third differences divide by h^3, so the near-machine steps that suit a
//! first derivative would drown an order-3 estimate in rounding noise.

use crate::error::{Error, Result};

/// A derivative value together with a conservative error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub error_estimate: f64,
}

/// Stencil value and the largest |f| sample seen (for roundoff bounds).
fn stencil<F: Fn(f64) -> f64>(f: &F, x: f64, order: u8, h: f64) -> (f64, f64) {
    let samples = [f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h)];
    let [fm2, fm1, f0, fp1, fp2] = samples;
    let value = match order {
        1 => (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h),
        2 => (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h),
        3 => (-fm2 + 2.0 * fm1 - 2.0 * fp1 + fp2) / (2.0 * h * h * h),
        _ => unreachable!("order validated by caller"),
    };
    let fmax = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    (value, fmax)
}

/// Sum of |stencil coefficients| per order, scaling the rounding noise
/// eps * max|f| / h^order that the difference quotient cannot beat.
fn roundoff_coefficient(order: u8) -> f64 {
    match order {
        1 => 18.0 / 12.0,
        2 => 64.0 / 12.0,
        _ => 6.0 / 2.0,
    }
}

/// Differentiate `f` at `x` with an explicit base step `h`.
pub fn numeric_derivative<F: Fn(f64) -> f64>(
    f: F,
    x: f64,
    order: u8,
    h: f64,
) -> Result<DerivativeEstimate> {
    if !(1..=3).contains(&order) {
        return Err(Error::Domain(format!("derivative order must be 1..=3, got {order}")));
    }
    if !x.is_finite() || !h.is_finite() {
        return Err(Error::Domain(format!("derivative inputs must be finite (x = {x}, h = {h})")));
    }
    if h <= 0.0 || x + 0.5 * h == x {
        return Err(Error::Step(format!("step {h} underflows at x = {x}")));
    }
    let (coarse, _) = stencil(&f, x, order, h);
    let (fine, fmax) = stencil(&f, x, order, 0.5 * h);
    // first/second derivative stencils are O(h^4), the third is O(h^2)
    let value = if order == 3 {
        (4.0 * fine - coarse) / 3.0
    } else {
        (16.0 * fine - coarse) / 15.0
    };
    let roundoff =
        roundoff_coefficient(order) * f64::EPSILON * fmax / (0.5 * h).powi(order as i32);
    Ok(DerivativeEstimate { value, error_estimate: (value - fine).abs() + roundoff })
}

/// Differentiate with an order-aware automatic step.
pub fn numeric_derivative_auto<F: Fn(f64) -> f64>(
    f: F,
    x: f64,
    order: u8,
) -> Result<DerivativeEstimate> {
    let scale = x.abs().max(1.0);
    let h = match order {
        1 => 1e-5 * scale,
        2 => 2e-3 * scale,
        _ => 6e-3 * scale,
    };
    numeric_derivative(f, x, order, h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_first_derivative_is_exact() {
        let d = numeric_derivative_auto(|x| x * x, 3.0, 1).unwrap();
        assert!((d.value - 6.0).abs() < 1e-10, "got {}", d.value);
    }

    #[test]
    fn sine_derivatives_hit_tight_tolerances() {
        let d1 = numeric_derivative_auto(f64::sin, 1.2, 1).unwrap();
        assert!((d1.value - 1.2f64.cos()).abs() < 1e-9);
        let d2 = numeric_derivative_auto(f64::sin, 1.2, 2).unwrap();
        assert!((d2.value + 1.2f64.sin()).abs() < 1e-8);
        let d3 = numeric_derivative_auto(f64::sin, 0.0, 3).unwrap();
        assert!((d3.value + 1.0).abs() < 1e-6, "got {}", d3.value);
    }

    #[test]
    fn error_estimate_brackets_the_true_error() {
        let d = numeric_derivative_auto(|x: f64| (2.0 * x).exp(), 0.3, 2).unwrap();
        let truth = 4.0 * (0.6f64).exp();
        assert!((d.value - truth).abs() < 10.0 * d.error_estimate.max(1e-12));
    }

    #[test]
    fn underflowing_steps_are_rejected() {
        assert!(matches!(
            numeric_derivative(f64::sin, 1e12, 1, 1e-9),
            Err(Error::Step(_))
        ));
        assert!(matches!(numeric_derivative(f64::sin, 0.0, 1, 0.0), Err(Error::Step(_))));
        assert!(matches!(numeric_derivative(f64::sin, 0.0, 4, 1e-3), Err(Error::Domain(_))));
    }
}
