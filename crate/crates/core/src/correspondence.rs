//! Cycle-averaged statistics of the momentum field and how the classical
//! limit emerges from them.
//!
//! For free motion the momentum field `Wx` oscillates with period
//! `pi / k` around the classical value `(2 m E)^(1/2)`. Averaging over one
//! cycle recovers that value exactly for every microstate, while the
//! second moment retains a microstate-dependent excess: the residual
//! indeterminacy. [`cycle_stats`] measures both by quadrature and keeps a
//! double-entry check against the stationary energy budget;
//! [`cycle_stats_closed`] gives the same numbers in closed form.
//!
//! Two different limits are worth separating. Raising the energy at fixed
//! microstate leaves every dimensionless ratio unchanged — the
//! indeterminacy is scale invariant, not decaying — whereas sending
//! `hbar -> 0` shrinks observably quantum effects such as the fraction of
//! a bound libration spent beyond the walls of a well. [`limit_sweep`]
//! tabulates either axis on a geometric grid.

use std::f64::consts::PI;

use crate::basis::{basis_free, BasisPair, Potential};
use crate::error::{Error, Result};
use crate::model::{Microstate, PhysicalContext};
use crate::qshje::{conjugate_momentum, schwarzian};
use crate::specfun::quad::{cycle_average, Quadrature};
use crate::squarewell::{fractional_forbidden_time, solve_symmetric_levels};

/// Marks the phase convention used by the closed forms: the momentum
/// denominator is written `(a + b) + A^(1/2) cos(2 k x - delta)` with
/// `delta = atan2(c, a - b)`.
pub const PHASE_CONVENTION: &str = "(a+b) + sqrt(A) cos(2 k x - delta), delta = atan2(c, a-b)";

/// Required agreement between the directly averaged quantum potential and
/// the stationary energy budget `E - V - <Wx^2>/2m`, relative to the
/// energy scale.
const BOOKKEEPING_TOL: f64 = 1e-8;

/// One cycle of momentum-field statistics for free motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleStats {
    /// `<Wx>` over one period; equals `(2 m E)^(1/2)` for every microstate.
    pub mean_wx: f64,
    /// `<Wx^2>` over one period; exceeds `2 m E` unless the microstate is
    /// classical.
    pub mean_wx2: f64,
    /// `<Wx^2> - <Wx>^2`: the residual indeterminacy of the momentum.
    pub variance: f64,
    /// Cycle average of the quantum potential `E - V - Wx^2 / 2m`; equals
    /// `-variance / 2m`.
    pub mean_quantum_potential: f64,
    /// Modulation amplitude `A^(1/2) = ((a-b)^2 + c^2)^(1/2)` of the
    /// momentum denominator, in the normalization of supplied microstate.
    pub envelope_amplitude: f64,
    /// Which phase convention the envelope refers to.
    pub phase_note: &'static str,
}

/// Extremes of the momentum field over one cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    /// Minimum of `Wx`: `2 (2mE)^(1/2) D / ((a+b) + A^(1/2))`.
    pub wx_min: f64,
    /// Maximum of `Wx`: `2 (2mE)^(1/2) D / ((a+b) - A^(1/2))`.
    pub wx_max: f64,
    /// Modulation amplitude `A^(1/2)`.
    pub amplitude: f64,
}

/// Which physical scale a [`limit_sweep`] varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Vary the energy at fixed `hbar`; grids must increase.
    Energy,
    /// Vary `hbar` at fixed energy; grids must decrease toward the
    /// classical limit.
    Hbar,
}

/// What to hold fixed while sweeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepScenario {
    /// Reference mass, `hbar`, and energy; the swept member is replaced
    /// point by point.
    pub context: PhysicalContext,
    /// Microstate shared by every point of the sweep.
    pub microstate: Microstate,
    /// Optional square-well geometry `(height, half_width)`. On an `hbar`
    /// sweep the ground level is re-solved at each point and its
    /// forbidden-time fraction recorded; energy sweeps ignore it because a
    /// continuous energy grid does not track a discrete level.
    pub well: Option<(f64, f64)>,
}

/// One grid point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// The swept value (an energy or an `hbar`).
    pub axis_value: f64,
    /// Quadrature cycle statistics at this point.
    pub stats: CycleStats,
    /// `mean_wx / (2 m E)^(1/2)`: unity up to quadrature error.
    pub momentum_ratio: f64,
    /// `variance / (2 m E)`: the dimensionless indeterminacy.
    pub variance_ratio: f64,
    /// Ground-level forbidden-time fraction, when tracked.
    pub fraction_forbidden: Option<f64>,
}

/// Whole-sweep summary numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepDiagnostics {
    /// Largest `|momentum_ratio - 1|` over the grid.
    pub max_momentum_deviation: f64,
    /// Spread (max minus min) of the dimensionless variance over the grid.
    pub variance_ratio_spread: f64,
    /// Whether the tracked forbidden fraction decreased strictly along the
    /// grid; `None` when no fraction was tracked.
    pub fraction_monotone_decreasing: Option<bool>,
}

/// A completed sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub diagnostics: SweepDiagnostics,
}

/// Measure one cycle of momentum statistics by quadrature.
///
/// The basis must describe free motion; for potentials the momentum field
/// is not periodic and no cycle average exists. The returned average
/// quantum potential is the directly integrated one; it is checked against
/// the stationary energy budget `E - <Wx^2>/2m` and an [`Error::Eval`] is
/// raised if the two disagree beyond `1e-8` of the energy scale, so a
/// successful return certifies the bookkeeping.
pub fn cycle_stats(basis: &BasisPair, quad: Quadrature) -> Result<CycleStats> {
    if !matches!(basis.potential(), Potential::Free) {
        return Err(Error::Domain(format!(
            "cycle statistics need free motion, got {}",
            basis.potential().label()
        )));
    }
    let ctx = basis.context();
    let ms = basis.microstate();
    let period = PI / ctx.wavenumber();
    // the free G form is strictly positive, so the closures cannot fail
    let wx = |x: f64| conjugate_momentum(basis, x).expect("free momentum is total");
    let mean_wx = cycle_average(&wx, period, 1, quad)?;
    let mean_wx2 = cycle_average(&wx, period, 2, quad)?;
    // E - V - Wx^2/2m equals +hbar^2/(4m) <W; x> pointwise; averaging it
    // shifted by E keeps the convergence test scaled even when the
    // integrand vanishes identically (classical microstate)
    let qp_factor = ctx.hbar * ctx.hbar / (4.0 * ctx.mass);
    let mean_qp = cycle_average(
        |x| ctx.energy + qp_factor * schwarzian(basis, x).expect("free Schwarzian is total"),
        period,
        1,
        quad,
    )? - ctx.energy;
    let budget = ctx.energy - mean_wx2 / (2.0 * ctx.mass);
    if (mean_qp - budget).abs() > BOOKKEEPING_TOL * ctx.energy.abs() {
        return Err(Error::Eval(format!(
            "cycle bookkeeping mismatch: <Q> = {mean_qp} but E - <Wx^2>/2m = {budget}"
        )));
    }
    let raw = mean_wx2 - mean_wx * mean_wx;
    // clamp roundoff-negative variance for classical microstates; genuine
    // negatives would violate the budget check above first
    let variance = if raw < 0.0 && raw > -1e-12 * mean_wx2 { 0.0 } else { raw };
    Ok(CycleStats {
        mean_wx,
        mean_wx2,
        variance,
        mean_quantum_potential: mean_qp,
        envelope_amplitude: ms.envelope_amplitude(),
        phase_note: PHASE_CONVENTION,
    })
}

/// The same statistics in closed form.
///
/// With `D = (ab - c^2/4)^(1/2)`:
///
/// ```text
/// <Wx>   = (2 m E)^(1/2)
/// <Wx^2> = m E (a + b) / D
/// var    = m E ((a + b) - 2 D) / D      (zero iff a = b, c = 0)
/// <Q>    = -var / 2m
/// ```
pub fn cycle_stats_closed(ctx: &PhysicalContext, ms: &Microstate) -> CycleStats {
    let two_me = 2.0 * ctx.mass * ctx.energy;
    let d = ms.det().sqrt();
    let mean_wx2 = ctx.mass * ctx.energy * (ms.a() + ms.b()) / d;
    let variance = mean_wx2 - two_me;
    CycleStats {
        mean_wx: two_me.sqrt(),
        mean_wx2,
        variance,
        mean_quantum_potential: -variance / (2.0 * ctx.mass),
        envelope_amplitude: ms.envelope_amplitude(),
        phase_note: PHASE_CONVENTION,
    }
}

/// Extremes of the free momentum field over one cycle, in closed form.
///
/// The denominator `(a+b) + A^(1/2) cos(2kx - delta)` reaches its extremes
/// where the cosine is `+-1`; positive definiteness guarantees
/// `(a+b) > A^(1/2)`, so both bounds are finite and positive. The ratio
/// `wx_max / wx_min` is invariant under microstate rescaling.
pub fn indeterminacy_envelope(ctx: &PhysicalContext, ms: &Microstate) -> Envelope {
    let scale = 2.0 * (2.0 * ctx.mass * ctx.energy).sqrt() * ms.det().sqrt();
    let sum = ms.a() + ms.b();
    let amp = ms.envelope_amplitude();
    Envelope { wx_min: scale / (sum + amp), wx_max: scale / (sum - amp), amplitude: amp }
}

/// Geometric grid of `n` points from `lo` to `hi` inclusive, ascending.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0) || !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(Error::Config(format!(
            "geometric grid needs 0 < lo < hi, got lo = {lo}, hi = {hi}"
        )));
    }
    if n < 2 {
        return Err(Error::Config(format!("geometric grid needs at least 2 points, got {n}")));
    }
    let ratio = (hi / lo).powf(1.0 / (n - 1) as f64);
    let mut grid: Vec<f64> = (0..n).map(|i| lo * ratio.powi(i as i32)).collect();
    grid[n - 1] = hi; // pin the endpoint against accumulated rounding
    Ok(grid)
}

/// Check a sweep grid against the sweep laws: at least four points, at
/// least two decades of span, strictly increasing for energy sweeps and
/// strictly decreasing (toward the classical limit) for `hbar` sweeps.
pub fn validate_sweep_grid(axis: SweepAxis, grid: &[f64]) -> Result<()> {
    if grid.len() < 4 {
        return Err(Error::Config(format!(
            "sweep grids need at least 4 points, got {}",
            grid.len()
        )));
    }
    for &v in grid {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!(
                "sweep grid values must be positive and finite, got {v}"
            )));
        }
    }
    let (lo, hi) = grid
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi / lo < 100.0 {
        return Err(Error::Config(format!(
            "sweep grids must span at least two decades, got {lo} ..= {hi}"
        )));
    }
    let ordered = match axis {
        SweepAxis::Energy => grid.windows(2).all(|w| w[1] > w[0]),
        SweepAxis::Hbar => grid.windows(2).all(|w| w[1] < w[0]),
    };
    if !ordered {
        let direction = match axis {
            SweepAxis::Energy => "increase",
            SweepAxis::Hbar => "decrease toward the classical limit",
        };
        return Err(Error::Config(format!("grid values must strictly {direction}")));
    }
    Ok(())
}

/// Measure one sweep point: cycle statistics at the swept value, plus the
/// ground-level forbidden fraction on `hbar` sweeps with a tracked well.
///
/// Pure and independent per point, so callers may fan points out to a
/// worker pool and reassemble them with [`collect_sweep`].
pub fn sweep_point(
    axis: SweepAxis,
    value: f64,
    scenario: &SweepScenario,
    quad: Quadrature,
) -> Result<SweepPoint> {
    let base = scenario.context;
    let ctx = match axis {
        SweepAxis::Energy => PhysicalContext::new(base.mass, base.hbar, value)?,
        SweepAxis::Hbar => PhysicalContext::new(base.mass, value, base.energy)?,
    };
    let basis = basis_free(&ctx, &scenario.microstate)?;
    let stats = cycle_stats(&basis, quad)?;
    let two_me = 2.0 * ctx.mass * ctx.energy;
    let fraction_forbidden = match (axis, scenario.well) {
        (SweepAxis::Hbar, Some((height, half_width))) => {
            let spectrum = solve_symmetric_levels(&ctx, height, half_width)?;
            Some(fractional_forbidden_time(&spectrum.levels[0]))
        }
        _ => None,
    };
    Ok(SweepPoint {
        axis_value: value,
        stats,
        momentum_ratio: stats.mean_wx / two_me.sqrt(),
        variance_ratio: stats.variance / two_me,
        fraction_forbidden,
    })
}

/// Assemble measured points (in grid order) into a [`SweepResult`] with
/// whole-sweep diagnostics.
pub fn collect_sweep(axis: SweepAxis, points: Vec<SweepPoint>) -> SweepResult {
    let max_momentum_deviation = points
        .iter()
        .map(|p| (p.momentum_ratio - 1.0).abs())
        .fold(0.0, f64::max);
    let (lo, hi) = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.variance_ratio), hi.max(p.variance_ratio))
    });
    let fractions: Vec<f64> = points.iter().filter_map(|p| p.fraction_forbidden).collect();
    let fraction_monotone_decreasing = if fractions.is_empty() {
        None
    } else {
        Some(fractions.windows(2).all(|w| w[1] < w[0]))
    };
    SweepResult {
        axis,
        points,
        diagnostics: SweepDiagnostics {
            max_momentum_deviation,
            variance_ratio_spread: hi - lo,
            fraction_monotone_decreasing,
        },
    }
}

/// Tabulate cycle statistics along a geometric grid of energies or of
/// `hbar` values.
///
/// Energy grids must increase and `hbar` grids decrease, both spanning at
/// least two decades with at least four points; anything else is a
/// [`Error::Config`]. Each point is measured by quadrature, not by the
/// closed forms, so the sweep doubles as an end-to-end consistency check;
/// the diagnostics summarize how well the classical mean held and how flat
/// the dimensionless indeterminacy stayed.
pub fn limit_sweep(
    axis: SweepAxis,
    grid: &[f64],
    scenario: &SweepScenario,
    quad: Quadrature,
) -> Result<SweepResult> {
    validate_sweep_grid(axis, grid)?;
    let points = grid
        .iter()
        .map(|&value| sweep_point(axis, value, scenario, quad))
        .collect::<Result<Vec<_>>>()?;
    Ok(collect_sweep(axis, points))
}
