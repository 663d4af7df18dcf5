//! Quadrature rules: cycle averages of periodic integrands and Romberg
//! integration on finite intervals.
//!
//! Periodic averages use the equispaced trapezoid rule, which converges
//! geometrically for smooth periodic integrands, with the point count
//! doubled until two successive estimates agree to the requested tolerance.

use crate::error::{Error, Result};

/// Parameters for the iterated quadrature rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Starting number of sample points (at least 16).
    pub n_points: usize,
    /// Relative convergence tolerance (> 0).
    pub tol: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { n_points: 64, tol: 1e-11 }
    }
}

impl Quadrature {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 16 {
            return Err(Error::Domain(format!(
                "quadrature needs at least 16 points, got {}",
                self.n_points
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("quadrature tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

const MAX_PERIODIC_POINTS: usize = 1 << 21;

/// Average of `f^order` over one period, i.e.
/// `(1/L) * integral_0^L f(x)^order dx`, for a smooth `L`-periodic `f`.
///
/// `order` must be 1 or 2. For `f(x) = C / (A + B cos(2 pi x / L))` with
/// `A > |B|` the results approach the closed forms `C/sqrt(A^2-B^2)` and
/// `C^2 A/(A^2-B^2)^(3/2)`.
pub fn cycle_average<F: Fn(f64) -> f64>(
    f: F,
    period: f64,
    order: u32,
    quad: Quadrature,
) -> Result<f64> {
    quad.validate()?;
    if !(period > 0.0) || !period.is_finite() {
        return Err(Error::Domain(format!("period must be positive and finite, got {period}")));
    }
    if order != 1 && order != 2 {
        return Err(Error::Domain(format!("moment order must be 1 or 2, got {order}")));
    }
    let sample = |n: usize| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            let x = period * (i as f64 + 0.5) / n as f64;
            let v = f(x);
            s += if order == 1 { v } else { v * v };
        }
        s / n as f64
    };
    let mut n = quad.n_points.next_power_of_two().max(16);
    let mut prev = sample(n);
    while n <= MAX_PERIODIC_POINTS {
        n *= 2;
        let cur = sample(n);
        if (cur - prev).abs() <= quad.tol * cur.abs().max(f64::MIN_POSITIVE) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature(format!(
        "periodic average did not settle to {} within {} points",
        quad.tol, MAX_PERIODIC_POINTS
    )))
}

const MAX_ROMBERG_LEVELS: usize = 22;

/// Romberg integration of `f` on `[a, b]` to relative tolerance `tol`.
pub fn romberg<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!("romberg endpoints must be finite, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("romberg tolerance must be positive, got {tol}")));
    }
    if a == b {
        return Ok(0.0);
    }
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(MAX_ROMBERG_LEVELS);
    let h = b - a;
    rows.push(vec![0.5 * h * (f(a) + f(b))]);
    for level in 1..MAX_ROMBERG_LEVELS {
        let n = 1usize << level; // panels at this level
        let step = h / n as f64;
        // new midpoints only
        let mut s = 0.0;
        let mut i = 1;
        while i < n {
            s += f(a + i as f64 * step);
            i += 2;
        }
        let trap = 0.5 * rows[level - 1][0] + step * s;
        let mut row = vec![trap];
        let mut pow4 = 1.0;
        for j in 1..=level {
            pow4 *= 4.0;
            let prev = rows[level - 1][j - 1];
            let cur = row[j - 1];
            row.push(cur + (cur - prev) / (pow4 - 1.0));
        }
        let best = *row.last().unwrap();
        let prev_best = *rows[level - 1].last().unwrap();
        rows.push(row);
        if level >= 4 && (best - prev_best).abs() <= tol * best.abs().max(f64::MIN_POSITIVE) {
            return Ok(best);
        }
    }
    Err(Error::Quadrature(format!(
        "romberg on [{a}, {b}] did not reach tolerance {tol} in {MAX_ROMBERG_LEVELS} levels"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_average_is_exact() {
        let v = cycle_average(|_| 3.25, 2.0, 1, Quadrature::default()).unwrap();
        assert!((v - 3.25).abs() < 1e-14);
    }

    /// Dense-sum oracle: one fixed very fine midpoint pass, no adaptivity.
    fn dense_average<F: Fn(f64) -> f64>(f: F, period: f64, order: u32) -> f64 {
        let n = 1 << 16;
        let mut s = 0.0;
        for i in 0..n {
            let v = f(period * (i as f64 + 0.5) / n as f64);
            s += if order == 1 { v } else { v * v };
        }
        s / n as f64
    }

    #[test]
    fn reciprocal_cosine_averages_match_closed_forms() {
        // (1/2pi) int dx / (A + B cos x) = 1/sqrt(A^2 - B^2)
        // (1/2pi) int dx / (A + B cos x)^2 = A/(A^2 - B^2)^(3/2)
        for (a, b, c) in [(2.0, 1.0, 1.0), (3.0, -2.0, 0.7), (1.5, 1.3, 2.0)] {
            let f = move |x: f64| c / (a + b * (2.0 * PI * x / 5.0).cos());
            let m1 = cycle_average(f, 5.0, 1, Quadrature::default()).unwrap();
            let m2 = cycle_average(f, 5.0, 2, Quadrature::default()).unwrap();
            let d: f64 = a * a - b * b;
            assert!((m1 - c / d.sqrt()).abs() < 1e-10 * m1.abs(), "order 1, A={a} B={b}");
            assert!(
                (m2 - c * c * a / d.powf(1.5)).abs() < 1e-10 * m2.abs(),
                "order 2, A={a} B={b}"
            );
            assert!((m1 - dense_average(f, 5.0, 1)).abs() < 1e-9 * m1.abs());
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(
            cycle_average(|_| 1.0, 1.0, 3, Quadrature::default()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            cycle_average(|_| 1.0, -1.0, 1, Quadrature::default()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            cycle_average(|_| 1.0, 1.0, 1, Quadrature { n_points: 8, tol: 1e-10 }),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            cycle_average(|_| 1.0, 1.0, 1, Quadrature { n_points: 16, tol: -1.0 }),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn romberg_integrates_smooth_functions() {
        let v = romberg(|x| x.exp(), 0.0, 1.0, 1e-12).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-12);
        let v = romberg(|x| x.sin(), 0.0, PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = romberg(|x| 1.0 / (1.0 + x * x), -4.0, 4.0, 1e-12).unwrap();
        assert!((v - 2.0 * 4f64.atan()).abs() < 1e-11);
    }

    #[test]
    fn romberg_reports_non_convergence() {
        // |x - 1/3|^(1/5) has an interior cusp too sharp for 22 levels at 1e-15.
        let r = romberg(|x| (x - 1.0 / 3.0).abs().powf(0.2), 0.0, 1.0, 1e-15);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
