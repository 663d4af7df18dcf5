//! The stationary Hamilton-Jacobi quantities carried by a basis pair: the
//! reduced action W (with continuous branch unwrapping), the conjugate
//! momentum Wx, the Schwarzian derivative of W, and the equation residual
//!
//! ```text
//! Wx^2/(2m) + V(x) - E + (hbar^2/4m) <W;x>
//! ```
//!
//! which vanishes identically for an exactly normalized pair and therefore
//! serves as a pointwise correctness certificate for everything upstream.
//!
//! All derivatives of Wx are analytic: with G = a phi^2 + b theta^2 +
//! c phi theta and the linear equation y'' = gamma y eliminating second
//! derivatives of the pair,
//!
//! ```text
//! Wx   = sqrt(2m) / G
//! Wxx  = -sqrt(2m) G' / G^2
//! Wxxx =  sqrt(2m) (2 G'^2 - G'' G) / G^3
//! G''  = 2 (a phi'^2 + b theta'^2 + c phi' theta') + 2 gamma G
//! ```
//!
//! so no nested numerical differentiation enters the production path.

use crate::basis::BasisPair;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// One evaluated point of the action field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QshjePoint {
    pub x: f64,
    /// W(x) - W(x_ref), continuously unwrapped.
    pub w: f64,
    pub wx: f64,
    pub wxx: f64,
    pub wxxx: f64,
    pub schwarzian: f64,
    pub residual: f64,
}

/// Wx and its first two derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumDerivatives {
    pub wx: f64,
    pub wxx: f64,
    pub wxxx: f64,
}

/// G, G', G'' of the microstate quadratic form at one point.
struct GForm {
    g: f64,
    gp: f64,
    gpp: f64,
}

fn g_form(basis: &BasisPair, x: f64) -> Result<GForm> {
    let v = basis.eval(x)?;
    let ms = basis.microstate();
    let (a, b, c) = (ms.a(), ms.b(), ms.c());
    let g = a * v.phi * v.phi + b * v.theta * v.theta + c * v.phi * v.theta;
    let gp = 2.0 * a * v.phi * v.phi_prime
        + 2.0 * b * v.theta * v.theta_prime
        + c * (v.phi_prime * v.theta + v.phi * v.theta_prime);
    let h = a * v.phi_prime * v.phi_prime
        + b * v.theta_prime * v.theta_prime
        + c * v.phi_prime * v.theta_prime;
    let gpp = 2.0 * h + 2.0 * basis.curvature_coefficient(x) * g;
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::Eval(format!(
            "quadratic form degenerate at x = {x}: G = {g}"
        )));
    }
    Ok(GForm { g, gp, gpp })
}

/// Wx(x) = sqrt(2m) / G(x); strictly positive for valid microstates.
pub fn conjugate_momentum(basis: &BasisPair, x: f64) -> Result<f64> {
    let f = g_form(basis, x)?;
    Ok((2.0 * basis.context().mass).sqrt() / f.g)
}

/// Wx, Wxx, Wxxx from the analytic form of G and its derivatives.
pub fn momentum_derivatives(basis: &BasisPair, x: f64) -> Result<MomentumDerivatives> {
    let f = g_form(basis, x)?;
    let sm = (2.0 * basis.context().mass).sqrt();
    let wx = sm / f.g;
    let wxx = -sm * f.gp / (f.g * f.g);
    let wxxx = sm * (2.0 * f.gp * f.gp - f.gpp * f.g) / (f.g * f.g * f.g);
    Ok(MomentumDerivatives { wx, wxx, wxxx })
}

/// Schwarzian derivative <W;x> = Wxxx/Wx - (3/2)(Wxx/Wx)^2, reduced to
/// (G'/G)^2 / 2 - G''/G.
pub fn schwarzian(basis: &BasisPair, x: f64) -> Result<f64> {
    let f = g_form(basis, x)?;
    let r = f.gp / f.g;
    Ok(0.5 * r * r - f.gpp / f.g)
}

/// The equation residual Wx^2/(2m) + V - E + (hbar^2/4m) <W;x>.
///
/// Identically zero in exact arithmetic for a pair meeting its Wronskian
/// target; the computed value measures accumulated evaluation error.
pub fn qshje_residual(basis: &BasisPair, x: f64) -> Result<f64> {
    let ctx = basis.context();
    let wx = conjugate_momentum(basis, x)?;
    let s = schwarzian(basis, x)?;
    let v = basis.potential().value(x);
    Ok(wx * wx / (2.0 * ctx.mass) + v - ctx.energy
        + ctx.hbar * ctx.hbar / (4.0 * ctx.mass) * s)
}

/// atan of the action phase argument (b theta/phi + c/2) / sqrt(det).
/// Evaluates cleanly through zeros of phi, where the argument passes
/// +-infinity and the arctangent reaches +-pi/2.
fn phase_atan(basis: &BasisPair, x: f64) -> Result<f64> {
    let v = basis.eval(x)?;
    let ms = basis.microstate();
    let num = ms.b() * v.theta + 0.5 * ms.c() * v.phi;
    let den = ms.det().sqrt() * v.phi;
    Ok((num / den).atan())
}

/// Zeros of phi between `from` and `to`, signed by direction: positive
/// counts zeros in (from, to], negative counts (to, from].
fn signed_zero_count(basis: &BasisPair, from: f64, to: f64) -> Result<f64> {
    if to >= from {
        Ok(basis.phi_zeros_between(from, to)? as f64)
    } else {
        Ok(-(basis.phi_zeros_between(to, from)? as f64))
    }
}

/// Monotonicity slack: roundoff in the two arctangents can leave a tiny
/// negative increment; anything beyond this scale is a real winding bug.
const UNWRAP_SLACK: f64 = 1e-9;

/// W(x) - W(x_ref), from the arctangent closed form plus pi per zero of
/// phi crossed, which keeps the branch continuous and dW/dx = Wx > 0.
pub fn reduced_action(basis: &BasisPair, x: f64, x_ref: f64) -> Result<f64> {
    let hbar = basis.context().hbar;
    let n = signed_zero_count(basis, x_ref, x)?;
    let dw = hbar * (phase_atan(basis, x)? - phase_atan(basis, x_ref)?) + PI * hbar * n;
    let dir = (x - x_ref).signum();
    if dir != 0.0 && dw * dir < -UNWRAP_SLACK * hbar {
        return Err(Error::Unwrap(format!(
            "action decreased by {dw} from x_ref = {x_ref} to x = {x}; \
             branch tracking lost a pole crossing"
        )));
    }
    Ok(dw)
}

/// Evaluate the full point record on a grid, with W anchored at `x_ref`.
///
/// Sorted grids are unwrapped incrementally (each step counts only the
/// zeros between neighbors), so long trajectories cost one zero count per
/// sample rather than one per sample times the span.
pub fn sample(basis: &BasisPair, x_ref: f64, xs: &[f64]) -> Result<Vec<QshjePoint>> {
    let hbar = basis.context().hbar;
    let sorted = xs.windows(2).all(|w| w[0] <= w[1]);
    let atan_ref = phase_atan(basis, x_ref)?;
    let mut out = Vec::with_capacity(xs.len());
    let mut prev: Option<(f64, f64)> = None; // (x, accumulated zero count)
    for &x in xs {
        let n = match (sorted, prev) {
            (true, Some((px, pn))) => pn + signed_zero_count(basis, px, x)?,
            _ => signed_zero_count(basis, x_ref, x)?,
        };
        prev = Some((x, n));
        let w = hbar * (phase_atan(basis, x)? - atan_ref) + PI * hbar * n;
        let d = momentum_derivatives(basis, x)?;
        let s = schwarzian(basis, x)?;
        let ctx = basis.context();
        let residual = d.wx * d.wx / (2.0 * ctx.mass) + basis.potential().value(x) - ctx.energy
            + ctx.hbar * ctx.hbar / (4.0 * ctx.mass) * s;
        out.push(QshjePoint {
            x,
            w,
            wx: d.wx,
            wxx: d.wxx,
            wxxx: d.wxxx,
            schwarzian: s,
            residual,
        });
    }
    Ok(out)
}
