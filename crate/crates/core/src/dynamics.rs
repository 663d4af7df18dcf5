//! Trajectory times from the energy derivative of the reduced action
//! (Jacobi's theorem t - t0 = dW/dE), their closed forms for free and
//! linear-ramp motion, Hamilton's principal function, and the width of the
//! transitional neighborhood around a classical turning point.

use crate::basis::{basis_free, basis_linear, square_well_offshell, BasisPair, Potential};
use crate::error::{Error, Result};
use crate::model::{classical_reference, Microstate, PhysicalContext};
use crate::qshje::{reduced_action, sample as sample_action};
use crate::specfun::{airy_eval, cycle_average, find_root, Quadrature};
use std::f64::consts::PI;

/// Relative energy step for differencing W with respect to E.
const ENERGY_STEP_REL: f64 = 1e-5;

/// One trajectory point: position and elapsed time relative to the anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub x: f64,
    pub t: f64,
}

/// A sampled trajectory together with the scenario that produced it.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub microstate: Microstate,
    pub context: PhysicalContext,
    pub potential: Potential,
}

/// The basis-pair family E' -> pair used for energy differentiation.
///
/// The square-well member is the C^1 off-level family, which is defined in
/// a full neighborhood of a bound level; the on-shell pair alone cannot be
/// differenced in E.
pub fn energy_family(
    ctx: &PhysicalContext,
    ms: &Microstate,
    potential: &Potential,
) -> impl Fn(f64) -> Result<BasisPair> {
    let (mass, hbar) = (ctx.mass, ctx.hbar);
    let ms = *ms;
    let potential = *potential;
    move |energy: f64| {
        let ctx = PhysicalContext::new(mass, hbar, energy)?;
        match potential {
            Potential::Free => basis_free(&ctx, &ms),
            Potential::SquareWell { height, half_width } => {
                square_well_offshell(&ctx, &ms, height, half_width)
            }
            Potential::Linear { force } => basis_linear(&ctx, &ms, force),
        }
    }
}

/// t - t0 at `x` (anchored at `x_ref`) by Richardson-extrapolated central
/// differencing of W(E', x) - W(E', x_ref) at steps 1e-5 E and 2e-5 E.
///
/// Every W evaluation unwraps from the same anchor, so the difference is
/// smooth in E even when a zero of phi crosses the interval.
pub fn trajectory_time<F>(family: F, energy: f64, x: f64, x_ref: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<BasisPair>,
{
    if !(energy > 0.0) || !energy.is_finite() {
        return Err(Error::Domain(format!("energy must be positive, got {energy}")));
    }
    let h = ENERGY_STEP_REL * energy;
    let dw = |e: f64| -> Result<f64> { reduced_action(&family(e)?, x, x_ref) };
    let fine = (dw(energy + h)? - dw(energy - h)?) / (2.0 * h);
    let coarse = (dw(energy + 2.0 * h)? - dw(energy - 2.0 * h)?) / (4.0 * h);
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Closed-form free-particle time, anchored at x_ref = 0:
///
/// ```text
/// t - t0 = (m/2E)^(1/2) * x * 2 sqrt(ab - c^2/4)
///          / [(a + b) + sqrt((a-b)^2 + c^2) cos(2kx - delta)]
/// ```
///
/// with delta = atan2(c, a - b). Obtained by differentiating the arctan
/// form of W with respect to E at fixed x.
pub fn trajectory_time_free_closed(ctx: &PhysicalContext, ms: &Microstate, x: f64) -> f64 {
    let k = ctx.wavenumber();
    let denom = (ms.a() + ms.b())
        + ms.envelope_amplitude() * (2.0 * k * x - ms.envelope_phase()).cos();
    (ctx.mass / (2.0 * ctx.energy)).sqrt() * x * 2.0 * ms.det().sqrt() / denom
}

/// Closed-form time to the turning point on the linear ramp V = f x:
///
/// ```text
/// t = (2 m hbar / f^2)^(1/3) / pi * sqrt(ab - c^2/4)
///     / [a Ai^2(z) + b Bi^2(z) + c Ai(z) Bi(z)],   z = alpha (x - E/f)
/// ```
///
/// Positive and finite through the turning point itself; deep in the
/// forbidden region the Bi^2 growth drives it to zero until the Airy
/// evaluation overflows.
pub fn trajectory_time_linear_closed(
    ctx: &PhysicalContext,
    ms: &Microstate,
    force: f64,
    x: f64,
) -> Result<f64> {
    Potential::Linear { force }.validate()?;
    let alpha = (2.0 * ctx.mass * force / (ctx.hbar * ctx.hbar)).cbrt();
    let z = alpha * (x - ctx.energy / force);
    let v = airy_eval(z)?;
    let g = ms.a() * v.ai * v.ai + ms.b() * v.bi * v.bi + ms.c() * v.ai * v.bi;
    Ok((2.0 * ctx.mass * ctx.hbar / (force * force)).cbrt() / PI * ms.det().sqrt() / g)
}

/// Free-particle time averaged over one cosine cycle of the denominator at
/// fixed numerator x; equals (m/2E)^(1/2) x for every microstate.
pub fn cycle_averaged_time_free(ctx: &PhysicalContext, ms: &Microstate, x: f64) -> Result<f64> {
    let k = ctx.wavenumber();
    let period = PI / k;
    let d2 = 2.0 * ms.det().sqrt();
    let (a_plus_b, amp, delta) = (ms.a() + ms.b(), ms.envelope_amplitude(), ms.envelope_phase());
    let avg = cycle_average(
        |u| d2 / (a_plus_b + amp * (2.0 * k * u - delta).cos()),
        period,
        1,
        Quadrature::default(),
    )?;
    Ok((ctx.mass / (2.0 * ctx.energy)).sqrt() * x * avg)
}

/// Hamilton's principal function S = [W(x) - W(x_ref)] - E t, zero at the
/// anchor (x_ref, t = 0).
pub fn principal_function(basis: &BasisPair, x: f64, x_ref: f64, t: f64) -> Result<f64> {
    Ok(reduced_action(basis, x, x_ref)? - basis.context().energy * t)
}

/// Width of the transitional neighborhood at a linear-ramp turning point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionWidth {
    /// Width in position units; shrinks like hbar^(2/3) at fixed (m, f).
    pub x_width: f64,
    /// Width in units of xi = (2mf)^(1/3) (x - E/f); independent of E.
    pub xi_width: f64,
}

/// Extent of the region on the allowed side of the turning point x_t = E/f
/// where the classical-microstate trajectory time deviates from the
/// classical time by more than `tol_rel` (relatively).
///
/// The deviation 1/(pi sqrt(|z|) (Ai^2 + Bi^2)) - 1 diverges at the
/// turning point and falls like 5/(32 |z|^3), so the boundary is a single
/// root; only the allowed side is measured because the forbidden side has
/// no classical time to compare against.
pub fn transition_width(
    ctx: &PhysicalContext,
    force: f64,
    tol_rel: f64,
) -> Result<TransitionWidth> {
    let ctx = PhysicalContext::new(ctx.mass, ctx.hbar, ctx.energy)?;
    Potential::Linear { force }.validate()?;
    if !(tol_rel > 0.0 && tol_rel < 0.5) {
        return Err(Error::Domain(format!(
            "transition tolerance must lie in (0, 0.5), got {tol_rel}"
        )));
    }
    let ms = Microstate::classical();
    let potential = Potential::Linear { force };
    let x_turn = ctx.energy / force;
    let alpha = (2.0 * ctx.mass * force / (ctx.hbar * ctx.hbar)).cbrt();
    // both factors stay evaluable for -120 < z < 0
    let dev = |x: f64| {
        let tq = trajectory_time_linear_closed(&ctx, &ms, force, x)
            .expect("allowed-side Airy evaluation stays in range");
        let tc = classical_reference(&ctx, &potential, x)
            .expect("points below the turning point are classically allowed")
            .time;
        tq / tc - 1.0
    };
    let inner = x_turn - 0.05 / alpha;
    let mut depth = 20.0;
    while dev(x_turn - depth / alpha) > tol_rel {
        depth *= 2.0;
        if depth > 120.0 {
            return Err(Error::Bracket(format!(
                "deviation still above {tol_rel} at z = -120"
            )));
        }
    }
    let outer = x_turn - depth / alpha;
    let x_star = find_root(|x| dev(x) - tol_rel, outer, inner, 1e-13 * (inner - outer).abs())?;
    let x_width = x_turn - x_star;
    Ok(TransitionWidth {
        x_width,
        xi_width: x_width * (2.0 * ctx.mass * force).cbrt(),
    })
}

/// Sample t - t0 on a grid by Jacobi differencing, anchored at `x_ref`.
///
/// The four energy-shifted action fields are each unwrapped incrementally
/// along the grid, so the cost is four action samples per point.
pub fn sample_trajectory(basis: &BasisPair, x_ref: f64, xs: &[f64]) -> Result<Trajectory> {
    let ctx = *basis.context();
    let family = energy_family(&ctx, basis.microstate(), basis.potential());
    let h = ENERGY_STEP_REL * ctx.energy;
    let shifted = |e: f64| -> Result<Vec<f64>> {
        Ok(sample_action(&family(e)?, x_ref, xs)?.into_iter().map(|p| p.w).collect())
    };
    let wp = shifted(ctx.energy + h)?;
    let wm = shifted(ctx.energy - h)?;
    let wp2 = shifted(ctx.energy + 2.0 * h)?;
    let wm2 = shifted(ctx.energy - 2.0 * h)?;
    let samples = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let fine = (wp[i] - wm[i]) / (2.0 * h);
            let coarse = (wp2[i] - wm2[i]) / (4.0 * h);
            TrajectorySample { x, t: (4.0 * fine - coarse) / 3.0 }
        })
        .collect();
    Ok(Trajectory {
        samples,
        microstate: *basis.microstate(),
        context: ctx,
        potential: *basis.potential(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{AIRY_AI_ZERO, AIRY_BI_ZERO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_microstate(rng: &mut ChaCha12Rng) -> Microstate {
        loop {
            let a = rng.gen_range(0.2..3.0);
            let b = rng.gen_range(0.2..3.0);
            let c = rng.gen_range(-1.5..1.5);
            if let Ok(ms) = Microstate::new(a, b, c) {
                return ms;
            }
        }
    }

    #[test]
    fn classical_free_trajectory_is_the_classical_one() {
        let ctx = PhysicalContext::unit(0.5).unwrap();
        let ms = Microstate::classical();
        let family = energy_family(&ctx, &ms, &Potential::Free);
        for x in [0.5, 1.0, 3.0] {
            let t = trajectory_time(&family, ctx.energy, x, 0.0).unwrap();
            let t_cl = (ctx.mass / (2.0 * ctx.energy)).sqrt() * x;
            assert!(
                (t - t_cl).abs() <= 1e-10 * t_cl,
                "x = {x}: {t} vs classical {t_cl} (rel {})",
                (t - t_cl).abs() / t_cl
            );
        }
    }

    #[test]
    fn numeric_and_closed_free_times_agree() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let ctx = PhysicalContext::unit(0.5).unwrap();
        for _ in 0..20 {
            let ms = random_microstate(&mut rng);
            let family = energy_family(&ctx, &ms, &Potential::Free);
            let x = rng.gen_range(-4.0..4.0);
            let numeric = trajectory_time(&family, ctx.energy, x, 0.0).unwrap();
            let closed = trajectory_time_free_closed(&ctx, &ms, x);
            assert!(
                (numeric - closed).abs() <= 1e-6 * closed.abs().max(1e-3),
                "x = {x}: {numeric} vs {closed}"
            );
        }
    }

    #[test]
    fn numeric_and_closed_linear_times_agree() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let ctx = PhysicalContext::unit(2.0).unwrap();
        let force = 1.0;
        for _ in 0..20 {
            let ms = random_microstate(&mut rng);
            let family = energy_family(&ctx, &ms, &Potential::Linear { force });
            // allowed region and shallow forbidden fringe
            let x = rng.gen_range(-4.0..2.5);
            let numeric = trajectory_time(&family, ctx.energy, x, -5.0).unwrap();
            let closed_here =
                trajectory_time_linear_closed(&ctx, &ms, force, x).unwrap();
            let closed_ref =
                trajectory_time_linear_closed(&ctx, &ms, force, -5.0).unwrap();
            // closed form counts down to the turning point, so the elapsed
            // time from x_ref to x is the decrease of the closed form; the
            // tolerance is relative to the time scale because the elapsed
            // value can be a near-cancellation of the two closed values
            let elapsed = closed_ref - closed_here;
            let scale = closed_ref.abs().max(closed_here.abs());
            assert!(
                (numeric - elapsed).abs() <= 1e-6 * scale,
                "x = {x}: {numeric} vs {elapsed}"
            );
        }
    }

    #[test]
    fn linear_classical_time_emerges_away_from_the_turning_point() {
        let ctx = PhysicalContext::unit(2.0).unwrap();
        let ms = Microstate::classical();
        let force = 1.0;
        let alpha = (2.0f64).cbrt();
        for zeta in [-8.0, -10.0, -15.0] {
            let x = ctx.energy / force + zeta / alpha;
            let tq = trajectory_time_linear_closed(&ctx, &ms, force, x).unwrap();
            let tc = classical_reference(&ctx, &Potential::Linear { force }, x)
                .unwrap()
                .time;
            let rel = (tq - tc).abs() / tc;
            assert!(rel <= 1e-3, "zeta = {zeta}: rel deviation {rel}");
        }
    }

    #[test]
    fn time_is_finite_and_positive_at_the_turning_point() {
        let ctx = PhysicalContext::unit(2.0).unwrap();
        let ms = Microstate::classical();
        let t = trajectory_time_linear_closed(&ctx, &ms, 1.0, 2.0).unwrap();
        let m2 = AIRY_AI_ZERO * AIRY_AI_ZERO + AIRY_BI_ZERO * AIRY_BI_ZERO;
        let expect = (2.0f64).cbrt() / PI / m2;
        assert!(t > 0.0);
        assert!((t - expect).abs() < 1e-10 * expect, "{t} vs {expect}");
    }

    #[test]
    fn cycle_averaged_time_is_microstate_independent() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let ctx = PhysicalContext::new(1.3, 0.9, 1.7).unwrap();
        for _ in 0..10 {
            let ms = random_microstate(&mut rng);
            let x = rng.gen_range(0.5..5.0);
            let avg = cycle_averaged_time_free(&ctx, &ms, x).unwrap();
            let classical = (ctx.mass / (2.0 * ctx.energy)).sqrt() * x;
            assert!(
                (avg - classical).abs() <= 1e-8 * classical,
                "{avg} vs {classical}"
            );
        }
    }

    #[test]
    fn averaged_action_slope_matches_twice_energy_times_averaged_time() {
        // <W> over one cycle is linear in the window center with slope
        // sqrt(2mE) = 2E * d<t>/dx; the intercept is an anchoring constant
        // that vanishes for c = 0.
        let ctx = PhysicalContext::unit(0.5).unwrap();
        let k = ctx.wavenumber();
        let period = PI / k;
        let quad = Quadrature { n_points: 256, tol: 1e-11 };
        for (a, b, c) in [(2.0, 1.0, 0.0), (2.0, 1.0, 0.9), (0.7, 2.2, -1.0)] {
            let ms = Microstate::new(a, b, c).unwrap();
            let basis = basis_free(&ctx, &ms).unwrap();
            let mean_w = |x: f64| {
                cycle_average(
                    |u| reduced_action(&basis, x - 0.5 * period + u, 0.0).unwrap(),
                    period,
                    1,
                    quad,
                )
                .unwrap()
            };
            let (x1, x2) = (1.3, 4.9);
            let slope = (mean_w(x2) - mean_w(x1)) / (x2 - x1);
            let classical_slope = (2.0 * ctx.mass * ctx.energy).sqrt();
            assert!(
                (slope - classical_slope).abs() <= 1e-8 * classical_slope,
                "ms = ({a},{b},{c}): slope {slope}"
            );
            if c == 0.0 {
                let direct = mean_w(x1);
                assert!(
                    (direct - classical_slope * x1).abs() <= 1e-8,
                    "c = 0 intercept should vanish, got {}",
                    direct - classical_slope * x1
                );
            }
        }
    }

    #[test]
    fn principal_function_reduces_to_the_classical_action() {
        let ctx = PhysicalContext::unit(0.5).unwrap();
        let basis = basis_free(&ctx, &Microstate::classical()).unwrap();
        let p = (2.0 * ctx.mass * ctx.energy).sqrt();
        let (x, t) = (2.7, 1.9);
        let s = principal_function(&basis, x, 0.0, t).unwrap();
        assert!((s - (p * x - ctx.energy * t)).abs() < 1e-12);
        assert_eq!(principal_function(&basis, 0.0, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn transition_width_is_invariant_in_xi_under_energy_doubling() {
        let tol = 0.01;
        let w1 = transition_width(&PhysicalContext::unit(2.0).unwrap(), 1.0, tol).unwrap();
        let w2 = transition_width(&PhysicalContext::unit(4.0).unwrap(), 1.0, tol).unwrap();
        assert!(
            (w1.xi_width - w2.xi_width).abs() <= 1e-6 * w1.xi_width,
            "{} vs {}",
            w1.xi_width,
            w2.xi_width
        );
    }

    #[test]
    fn transition_width_shrinks_like_hbar_to_the_two_thirds() {
        let tol = 0.01;
        let w1 = transition_width(&PhysicalContext::new(1.0, 1.0, 2.0).unwrap(), 1.0, tol)
            .unwrap();
        let w2 = transition_width(&PhysicalContext::new(1.0, 0.125, 2.0).unwrap(), 1.0, tol)
            .unwrap();
        let expected = w1.x_width * 0.125f64.powf(2.0 / 3.0);
        assert!(
            (w2.x_width - expected).abs() <= 1e-6 * expected,
            "{} vs {}",
            w2.x_width,
            expected
        );
    }

    #[test]
    fn looser_tolerance_gives_narrower_transition() {
        let ctx = PhysicalContext::unit(2.0).unwrap();
        let wide = transition_width(&ctx, 1.0, 0.01).unwrap();
        let narrow = transition_width(&ctx, 1.0, 0.49).unwrap();
        assert!(narrow.x_width < wide.x_width);
        assert!(matches!(transition_width(&ctx, 1.0, 0.6), Err(Error::Domain(_))));
        assert!(matches!(transition_width(&ctx, 1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn sampled_classical_trajectory_advances_monotonically() {
        let ctx = PhysicalContext::unit(0.5).unwrap();
        let basis = basis_free(&ctx, &Microstate::classical()).unwrap();
        let xs: Vec<f64> = (0..80).map(|i| 0.1 * i as f64).collect();
        let traj = sample_trajectory(&basis, 0.0, &xs).unwrap();
        assert_eq!(traj.samples.len(), xs.len());
        for pair in traj.samples.windows(2) {
            assert!(pair[1].t > pair[0].t, "time must increase along classical motion");
        }
    }

    #[test]
    fn sampled_trajectory_matches_the_closed_form_with_retrograde_segments() {
        // Non-classical free microstates trade speed against the cosine
        // envelope; far enough out the oscillation makes t(x) locally
        // decrease, so only closed-form agreement is asserted.
        let ctx = PhysicalContext::unit(0.5).unwrap();
        let ms = Microstate::new(2.0, 1.0, 0.5).unwrap();
        let basis = basis_free(&ctx, &ms).unwrap();
        let xs: Vec<f64> = (0..80).map(|i| 0.1 * i as f64).collect();
        let traj = sample_trajectory(&basis, 0.0, &xs).unwrap();
        let mut saw_retrograde = false;
        for pair in traj.samples.windows(2) {
            if pair[1].t < pair[0].t {
                saw_retrograde = true;
            }
        }
        assert!(saw_retrograde, "expected retrograde stretches for this microstate");
        for s in traj.samples.iter().step_by(13) {
            let closed = trajectory_time_free_closed(&ctx, &ms, s.x);
            assert!(
                (s.t - closed).abs() <= 1e-6 * closed.abs().max(1e-3),
                "x = {}: {} vs {closed}",
                s.x,
                s.t
            );
        }
    }
}
