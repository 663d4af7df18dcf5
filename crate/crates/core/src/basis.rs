//! Basis pairs (phi, theta) of the linear second-order problem
//! y'' = gamma(x) y with gamma = 2m (V - E) / hbar^2, for the three
//! supported potentials.
//!
//! Every constructor normalizes the pair so that its Wronskian
//! phi theta' - phi' theta equals sqrt(2m / (hbar^2 (ab - c^2/4))) for the
//! microstate the pair will carry. With that normalization the momentum
//! field is simply Wx = sqrt(2m) / (a phi^2 + b theta^2 + c phi theta),
//! with no separate normalization constant to track downstream.
//!
//! Conventions: phi is the even-type solution (cosine-like), theta the
//! odd-type one (sine-like). For the square well the exterior pieces are
//! the C^1 continuations of the interior trig solutions; for the linear
//! potential the pair is built from the two standard solutions of the
//! Airy equation.

use crate::error::{Error, Result};
use crate::model::{Microstate, PhysicalContext};
use crate::specfun::airy_eval;
use std::f64::consts::{FRAC_PI_2, PI};

/// Exponent bound for the square-well exterior: beyond this the growing
/// piece no longer fits in an f64.
const WELL_EXP_MAX: f64 = 700.0;

/// Relative tolerance on the bound-state condition k tan(kq) = kappa for
/// the on-shell square-well constructor.
const ON_SHELL_TOL: f64 = 1e-8;

/// Potential energy profile of a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// V = 0 everywhere.
    Free,
    /// V = 0 for |x| <= half_width, V = height outside.
    SquareWell { height: f64, half_width: f64 },
    /// V = force * x with force > 0.
    Linear { force: f64 },
}

impl Potential {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Potential::Free => Ok(()),
            Potential::SquareWell { height, half_width } => {
                if !(height > 0.0) || !height.is_finite() {
                    return Err(Error::Domain(format!(
                        "square-well height must be positive and finite, got {height}"
                    )));
                }
                if !(half_width > 0.0) || !half_width.is_finite() {
                    return Err(Error::Domain(format!(
                        "square-well half-width must be positive and finite, got {half_width}"
                    )));
                }
                Ok(())
            }
            Potential::Linear { force } => {
                if !(force > 0.0) || !force.is_finite() {
                    return Err(Error::Domain(format!(
                        "linear-potential force must be positive and finite, got {force}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// V(x).
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::SquareWell { height, half_width } => {
                if x.abs() <= half_width {
                    0.0
                } else {
                    height
                }
            }
            Potential::Linear { force } => force * x,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Potential::Free => "free",
            Potential::SquareWell { .. } => "square-well",
            Potential::Linear { .. } => "linear",
        }
    }
}

/// Values of the pair and its first derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisValues {
    pub phi: f64,
    pub theta: f64,
    pub phi_prime: f64,
    pub theta_prime: f64,
}

#[derive(Debug, Clone)]
enum Form {
    /// phi = amp cos(kx), theta = amp sin(kx).
    Trig { k: f64, amp: f64 },
    /// Trig inside |x| <= q, C^1 exponential continuations outside;
    /// the right-exterior coefficients multiply exp(+-kappa (x - q)),
    /// the left side follows from phi even / theta odd.
    Well {
        k: f64,
        kappa: f64,
        q: f64,
        amp: f64,
        a_phi: f64,
        b_phi: f64,
        a_theta: f64,
        b_theta: f64,
    },
    /// phi = scale Ai(z), theta = scale Bi(z), z = alpha (x - x_turn).
    Airy { alpha: f64, x_turn: f64, scale: f64 },
}

/// A normalized basis pair bound to its context, microstate, and potential.
#[derive(Debug, Clone)]
pub struct BasisPair {
    ctx: PhysicalContext,
    ms: Microstate,
    potential: Potential,
    form: Form,
}

impl BasisPair {
    pub fn context(&self) -> &PhysicalContext {
        &self.ctx
    }

    pub fn microstate(&self) -> &Microstate {
        &self.ms
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// The Wronskian the construction targets:
    /// sqrt(2m / (hbar^2 (ab - c^2/4))).
    pub fn wronskian_target(&self) -> f64 {
        (2.0 * self.ctx.mass / (self.ctx.hbar * self.ctx.hbar * self.ms.det())).sqrt()
    }

    /// Wronskian computed from the evaluated pair at `x`; agreement with
    /// [`BasisPair::wronskian_target`] measures evaluation error.
    pub fn wronskian_at(&self, x: f64) -> Result<f64> {
        let v = self.eval(x)?;
        Ok(v.phi * v.theta_prime - v.phi_prime * v.theta)
    }

    /// gamma(x) = 2m (V(x) - E) / hbar^2, the coefficient in y'' = gamma y.
    pub fn curvature_coefficient(&self, x: f64) -> f64 {
        2.0 * self.ctx.mass * (self.potential.value(x) - self.ctx.energy)
            / (self.ctx.hbar * self.ctx.hbar)
    }

    /// Local wavenumber scale sqrt(|gamma(x)|), floored away from zero near
    /// turning points so quarter-wavelength stepping always terminates.
    pub fn local_wavenumber(&self, x: f64) -> f64 {
        match &self.form {
            Form::Trig { k, .. } => *k,
            Form::Well { k, kappa, q, .. } => {
                if x.abs() <= *q {
                    *k
                } else {
                    *kappa
                }
            }
            Form::Airy { alpha, .. } => {
                self.curvature_coefficient(x).abs().sqrt().max(0.5 * alpha)
            }
        }
    }

    /// Unit step direction that moves `x` toward (or deeper into) the
    /// classically allowed region.
    pub fn direction_toward_allowed(&self, x: f64) -> f64 {
        match &self.form {
            Form::Trig { .. } => 1.0,
            Form::Well { q, .. } => {
                if x > *q {
                    -1.0
                } else {
                    1.0
                }
            }
            Form::Airy { .. } => -1.0,
        }
    }

    /// Evaluate (phi, theta, phi', theta') at `x`.
    pub fn eval(&self, x: f64) -> Result<BasisValues> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("basis argument must be finite, got {x}")));
        }
        match &self.form {
            Form::Trig { k, amp } => {
                let (s, c) = (k * x).sin_cos();
                Ok(BasisValues {
                    phi: amp * c,
                    theta: amp * s,
                    phi_prime: -amp * k * s,
                    theta_prime: amp * k * c,
                })
            }
            Form::Well { .. } => self.eval_well(x),
            Form::Airy { alpha, x_turn, scale } => {
                let z = alpha * (x - x_turn);
                let v = airy_eval(z)?;
                Ok(BasisValues {
                    phi: scale * v.ai,
                    theta: scale * v.bi,
                    phi_prime: scale * alpha * v.ai_prime,
                    theta_prime: scale * alpha * v.bi_prime,
                })
            }
        }
    }

    fn eval_well(&self, x: f64) -> Result<BasisValues> {
        let Form::Well { k, kappa, q, amp, .. } = &self.form else { unreachable!() };
        if x.abs() <= *q {
            let (s, c) = (k * x).sin_cos();
            return Ok(BasisValues {
                phi: amp * c,
                theta: amp * s,
                phi_prime: -amp * k * s,
                theta_prime: amp * k * c,
            });
        }
        if kappa * (x.abs() - q) > WELL_EXP_MAX {
            return Err(Error::Overflow(format!(
                "square-well exterior at x = {x} exceeds the exponential range"
            )));
        }
        if x > *q {
            Ok(self.eval_well_right(x))
        } else {
            // phi even, theta odd
            let v = self.eval_well_right(-x);
            Ok(BasisValues {
                phi: v.phi,
                theta: -v.theta,
                phi_prime: -v.phi_prime,
                theta_prime: v.theta_prime,
            })
        }
    }

    fn eval_well_right(&self, x: f64) -> BasisValues {
        let Form::Well { kappa, q, amp, a_phi, b_phi, a_theta, b_theta, .. } = &self.form else {
            unreachable!()
        };
        let grow = (kappa * (x - q)).exp();
        let decay = 1.0 / grow;
        // the on-shell phi has a_phi exactly zero; avoid 0 * inf
        let term = |coef: f64, factor: f64| if coef == 0.0 { 0.0 } else { coef * factor };
        let phi = amp * (term(*a_phi, grow) + term(*b_phi, decay));
        let theta = amp * (term(*a_theta, grow) + term(*b_theta, decay));
        let phi_prime = amp * kappa * (term(*a_phi, grow) - term(*b_phi, decay));
        let theta_prime = amp * kappa * (term(*a_theta, grow) - term(*b_theta, decay));
        BasisValues { phi, theta, phi_prime, theta_prime }
    }

    /// Number of zeros of phi in the half-open interval (lo, hi].
    ///
    /// Zero counting drives the branch unwrapping of the reduced action:
    /// each zero of phi advances the arctangent argument through a pole.
    pub fn phi_zeros_between(&self, lo: f64, hi: f64) -> Result<usize> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::Domain(format!(
                "zero count needs a finite ordered interval, got ({lo}, {hi}]"
            )));
        }
        if lo == hi {
            return Ok(0);
        }
        match &self.form {
            Form::Trig { k, .. } => Ok(trig_zero_count(*k, lo, hi)),
            Form::Well { k, kappa, q, a_phi, b_phi, .. } => {
                let mut n = 0usize;
                // interior segment (max(lo,-q), min(hi,q)]
                let ilo = lo.max(-q);
                let ihi = hi.min(*q);
                if ihi > ilo {
                    n += trig_zero_count(*k, ilo, ihi);
                }
                // at most one exterior zero per side, where the growing and
                // decaying pieces of phi cancel
                if *a_phi != 0.0 {
                    let ratio = -b_phi / a_phi;
                    if ratio > 0.0 {
                        let x_star = q + ratio.ln() / (2.0 * kappa);
                        if x_star > *q {
                            if lo.max(*q) < x_star && x_star <= hi {
                                n += 1;
                            }
                            let mirrored = -x_star;
                            if lo < mirrored && mirrored <= hi.min(-q) {
                                n += 1;
                            }
                        }
                    }
                }
                Ok(n)
            }
            Form::Airy { alpha, x_turn, .. } => {
                airy_zero_count(alpha * (lo - x_turn), alpha * (hi - x_turn))
            }
        }
    }
}

/// Zeros of cos(k x) in (lo, hi], counted in closed form.
fn trig_zero_count(k: f64, lo: f64, hi: f64) -> usize {
    let t = |x: f64| ((k * x - FRAC_PI_2) / PI).floor();
    let n = t(hi) - t(lo);
    if n > 0.0 {
        n as usize
    } else {
        0
    }
}

/// Zeros of Ai in (z_lo, z_hi], counted by a sign-change scan. All zeros
/// of Ai lie below -2.33, and their spacing near z is about pi/sqrt(|z|);
/// half-spacing steps cannot skip a pair.
fn airy_zero_count(z_lo: f64, z_hi: f64) -> Result<usize> {
    let hi = z_hi.min(-2.0);
    if hi <= z_lo {
        return Ok(0);
    }
    let mut count = 0usize;
    let mut z = z_lo;
    let mut prev = airy_eval(z)?.ai;
    while z < hi {
        let step = FRAC_PI_2 / (-z).sqrt().max(1.0);
        z = (z + step).min(hi);
        let cur = airy_eval(z)?.ai;
        if prev * cur < 0.0 {
            count += 1;
        }
        prev = cur;
    }
    Ok(count)
}

/// Basis pair for V = 0: phi = P cos(kx), theta = P sin(kx) with
/// k = sqrt(2mE)/hbar and P^4 = 2m / (hbar^2 k^2 (ab - c^2/4)).
pub fn basis_free(ctx: &PhysicalContext, ms: &Microstate) -> Result<BasisPair> {
    let ctx = PhysicalContext::new(ctx.mass, ctx.hbar, ctx.energy)?;
    let k = ctx.wavenumber();
    let amp = (2.0 * ctx.mass / (ctx.hbar * ctx.hbar * k * k * ms.det())).powf(0.25);
    Ok(BasisPair {
        ctx,
        ms: *ms,
        potential: Potential::Free,
        form: Form::Trig { k, amp },
    })
}

fn well_parameters(ctx: &PhysicalContext, height: f64, half_width: f64) -> Result<(f64, f64)> {
    Potential::SquareWell { height, half_width }.validate()?;
    if ctx.energy >= height {
        return Err(Error::Domain(format!(
            "square-well scenarios are bound: E = {} must lie below U = {height}",
            ctx.energy
        )));
    }
    let k = ctx.wavenumber();
    let kappa = (2.0 * ctx.mass * (height - ctx.energy)).sqrt() / ctx.hbar;
    Ok((k, kappa))
}

fn well_pair(
    ctx: PhysicalContext,
    ms: Microstate,
    height: f64,
    half_width: f64,
    k: f64,
    kappa: f64,
    coefs: [f64; 4],
) -> BasisPair {
    let amp = (2.0 * ctx.mass / (ctx.hbar * ctx.hbar * k * k * ms.det())).powf(0.25);
    let [a_phi, b_phi, a_theta, b_theta] = coefs;
    BasisPair {
        ctx,
        ms,
        potential: Potential::SquareWell { height, half_width },
        form: Form::Well { k, kappa, q: half_width, amp, a_phi, b_phi, a_theta, b_theta },
    }
}

/// Basis pair for a bound level of the symmetric square well.
///
/// Interior phi = P cos(kx), theta = P sin(kx); exterior pieces are their
/// C^1 continuations against exp(+-kappa (x - q)). The energy must satisfy
/// the even-level condition k tan(kq) = kappa to relative 1e-8, which makes
/// phi purely decaying outside the well; the exterior coefficients then
/// take their exact on-shell values so the tails stay clean arbitrarily
/// far out.
pub fn basis_square_well(
    ctx: &PhysicalContext,
    ms: &Microstate,
    height: f64,
    half_width: f64,
) -> Result<BasisPair> {
    let ctx = PhysicalContext::new(ctx.mass, ctx.hbar, ctx.energy)?;
    let (k, kappa) = well_parameters(&ctx, height, half_width)?;
    let kq = k * half_width;
    let residual = k * kq.sin() - kappa * kq.cos();
    let scale = (k * kq.sin()).hypot(kappa * kq.cos());
    if !(residual.abs() <= ON_SHELL_TOL * scale) {
        return Err(Error::Eigenvalue(format!(
            "E = {} is not an even bound level of the well (U = {height}, q = {half_width}): \
             relative detuning {:.3e}",
            ctx.energy,
            residual.abs() / scale
        )));
    }
    let (s, c) = kq.sin_cos();
    // on-shell: growing part of phi vanishes identically
    let coefs = [0.0, c, 0.5 / s, -(2.0 * kq).cos() / (2.0 * s)];
    Ok(well_pair(ctx, *ms, height, half_width, k, kappa, coefs))
}

/// Square-well basis pair at an arbitrary energy 0 < E < U, without the
/// bound-level condition.
///
/// The pair stays C^1 at the walls for every E, so this family supports
/// differentiation with respect to energy; off shell, phi picks up a
/// growing exterior component (and with it one exterior zero per side
/// whenever the two pieces cancel).
pub fn square_well_offshell(
    ctx: &PhysicalContext,
    ms: &Microstate,
    height: f64,
    half_width: f64,
) -> Result<BasisPair> {
    let ctx = PhysicalContext::new(ctx.mass, ctx.hbar, ctx.energy)?;
    let (k, kappa) = well_parameters(&ctx, height, half_width)?;
    let kq = k * half_width;
    let (s, c) = kq.sin_cos();
    let r = k / kappa;
    let coefs = [
        0.5 * (c - r * s),
        0.5 * (c + r * s),
        0.5 * (s + r * c),
        0.5 * (s - r * c),
    ];
    Ok(well_pair(ctx, *ms, height, half_width, k, kappa, coefs))
}

/// Basis pair for V = f x: phi and theta are the decaying and growing Airy
/// solutions of y'' = alpha^3 (x - E/f) y with alpha = (2mf/hbar^2)^(1/3),
/// scaled to the target Wronskian.
pub fn basis_linear(ctx: &PhysicalContext, ms: &Microstate, force: f64) -> Result<BasisPair> {
    let ctx = PhysicalContext::new(ctx.mass, ctx.hbar, ctx.energy)?;
    Potential::Linear { force }.validate()?;
    let alpha = (2.0 * ctx.mass * force / (ctx.hbar * ctx.hbar)).cbrt();
    let x_turn = ctx.energy / force;
    // W(Ai, Bi) = 1/pi in z, so scale^2 alpha / pi must match the target
    let target = (2.0 * ctx.mass / (ctx.hbar * ctx.hbar * ms.det())).sqrt();
    let scale = (PI * target / alpha).sqrt();
    Ok(BasisPair {
        ctx,
        ms: *ms,
        potential: Potential::Linear { force },
        form: Form::Airy { alpha, x_turn, scale },
    })
}
