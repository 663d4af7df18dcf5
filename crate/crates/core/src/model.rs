//! Physical contexts, microstates, and the map between a microstate and
//! the initial data of its momentum field.
//!
//! A microstate is a triple (a, b, c) selecting one trajectory solution of
//! the stationary Hamilton-Jacobi problem at fixed energy through the
//! quadratic form
//!
//! ```text
//! G(x) = a phi^2 + b theta^2 + c phi theta,      a > 0, b > 0, ab - c^2/4 > 0
//! Wx(x) = sqrt(2m) / G(x)
//! ```
//!
//! where (phi, theta) is a basis pair of the associated linear problem with
//! squared Wronskian 2m / [hbar^2 (ab - c^2/4)]. The triple (1, 1, 0)
//! reproduces classical motion for the free particle; any other choice
//! carries microstructure that no wave-level observable resolves.
//!
//! The equivalent initial-value description is (x0, Wx(x0), Wxx(x0))
//! together with the Wronskian constant. Recovering (a, b, c) from initial
//! values is a Gram-matrix reconstruction: the values of the quadratic form
//! against the vectors v = (phi, theta) and v' = (phi', theta') at x0 are
//! known, and the form's determinant is pinned by the Wronskian, which
//! determines the remaining Gram entry uniquely.

use crate::basis::{BasisPair, Potential};
use crate::error::{Error, Result};

/// Mass, Planck constant, and energy for one scenario. All three must be
/// positive and finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalContext {
    pub mass: f64,
    pub hbar: f64,
    pub energy: f64,
}

impl PhysicalContext {
    pub fn new(mass: f64, hbar: f64, energy: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("hbar", hbar), ("energy", energy)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(PhysicalContext { mass, hbar, energy })
    }

    /// Convenience constructor with m = hbar = 1.
    pub fn unit(energy: f64) -> Result<Self> {
        PhysicalContext::new(1.0, 1.0, energy)
    }

    /// Free-space wavenumber sqrt(2 m E) / hbar.
    pub fn wavenumber(&self) -> f64 {
        (2.0 * self.mass * self.energy).sqrt() / self.hbar
    }
}

/// The trajectory-selecting triple (a, b, c). Fields are private so every
/// constructed value satisfies a > 0, b > 0 and ab - c^2/4 > 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Microstate {
    a: f64,
    b: f64,
    c: f64,
}

impl Microstate {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("microstate {name} must be finite, got {v}")));
            }
        }
        if !(a > 0.0) || !(b > 0.0) {
            return Err(Error::Domain(format!(
                "microstate requires a > 0 and b > 0, got a = {a}, b = {b}"
            )));
        }
        let det = a * b - 0.25 * c * c;
        if !(det > 0.0) {
            return Err(Error::Domain(format!(
                "microstate form must be positive definite: ab - c^2/4 = {det}"
            )));
        }
        Ok(Microstate { a, b, c })
    }

    /// The classical triple (1, 1, 0).
    pub fn classical() -> Self {
        Microstate { a: 1.0, b: 1.0, c: 0.0 }
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }
    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }
    #[inline]
    pub fn c(&self) -> f64 {
        self.c
    }

    /// Determinant ab - c^2/4 of the quadratic form.
    #[inline]
    pub fn det(&self) -> f64 {
        self.a * self.b - 0.25 * self.c * self.c
    }

    /// Amplitude sqrt((a-b)^2 + c^2) of the momentum-field oscillation;
    /// zero exactly for classical-looking triples lambda * (1, 1, 0).
    pub fn envelope_amplitude(&self) -> f64 {
        ((self.a - self.b).powi(2) + self.c * self.c).sqrt()
    }

    /// Phase offset delta = atan2(c, a - b) of the momentum-field
    /// oscillation cos(2 k x - delta).
    pub fn envelope_phase(&self) -> f64 {
        self.c.atan2(self.a - self.b)
    }

    /// Uniformly rescaled triple lambda * (a, b, c); the physical momentum
    /// field is invariant under this rescaling.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        Microstate::new(self.a * lambda, self.b * lambda, self.c * lambda)
    }
}

/// Free-function alias for [`Microstate::new`].
pub fn make_microstate(a: f64, b: f64, c: f64) -> Result<Microstate> {
    Microstate::new(a, b, c)
}

/// Initial data (x0, Wx(x0), Wxx(x0)) of a momentum field. `wx0` is
/// strictly positive under the increasing-action convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialValues {
    pub x0: f64,
    pub wx0: f64,
    pub wxx0: f64,
}

impl InitialValues {
    pub fn new(x0: f64, wx0: f64, wxx0: f64) -> Result<Self> {
        if !x0.is_finite() || !wx0.is_finite() || !wxx0.is_finite() {
            return Err(Error::Domain(format!(
                "initial values must be finite, got ({x0}, {wx0}, {wxx0})"
            )));
        }
        if !(wx0 > 0.0) {
            return Err(Error::Domain(format!(
                "Wx(x0) must be positive under the increasing-action convention, got {wx0}"
            )));
        }
        Ok(InitialValues { x0, wx0, wxx0 })
    }
}

/// Threshold on the sine of the angle between (phi, theta) and
/// (phi', theta'): anchors where the pair is closer to parallel than
/// 1 part in 1e8 do not determine the microstate at all.
const ANCHOR_CONDITION_SIN: f64 = 1e-8;
/// Target conditioning when choosing an anchor ourselves; reconstruction
/// error grows like machine epsilon over the squared sine, so stopping at
/// 1e-3 keeps round-trips near 1e-10.
const REANCHOR_TARGET_SIN: f64 = 1e-3;
const MAX_REANCHOR_STEPS: usize = 512;

fn anchor_condition(basis: &BasisPair, x0: f64) -> Result<f64> {
    let v = basis.eval(x0)?;
    let w = v.phi * v.theta_prime - v.phi_prime * v.theta;
    let n1 = v.phi.hypot(v.theta);
    let n2 = v.phi_prime.hypot(v.theta_prime);
    if n1 == 0.0 || n2 == 0.0 {
        return Ok(0.0);
    }
    Ok((w / (n1 * n2)).abs())
}

/// Initial data of the momentum field carried by `basis` at (or near) the
/// requested anchor.
///
/// Anchors deep inside a classically forbidden region leave the basis pair
/// almost parallel and the inverse map ill-conditioned there, so the anchor
/// is shifted by quarter local wavelengths (toward the allowed region when
/// there is one) until the conditioning threshold is met; the returned
/// `x0` records the anchor actually used.
pub fn microstate_to_initial_values(basis: &BasisPair, x0: f64) -> Result<InitialValues> {
    let mut x = x0;
    for _ in 0..MAX_REANCHOR_STEPS {
        if anchor_condition(basis, x)? >= REANCHOR_TARGET_SIN {
            let v = basis.eval(x)?;
            let ms = basis.microstate();
            let g = ms.a() * v.phi * v.phi + ms.b() * v.theta * v.theta + ms.c() * v.phi * v.theta;
            let gp = 2.0 * ms.a() * v.phi * v.phi_prime
                + 2.0 * ms.b() * v.theta * v.theta_prime
                + ms.c() * (v.phi_prime * v.theta + v.phi * v.theta_prime);
            let sm = (2.0 * basis.context().mass).sqrt();
            return InitialValues::new(x, sm / g, -sm * gp / (g * g));
        }
        let k = basis.local_wavenumber(x).max(1e-12);
        let step = std::f64::consts::FRAC_PI_2 / k;
        x += step * basis.direction_toward_allowed(x);
    }
    Err(Error::Singular(format!(
        "no well-conditioned anchor found near x0 = {x0}"
    )))
}

/// Recover the microstate from initial data, using `basis` to fix the
/// normalization convention of the pair the data refer to.
///
/// Solves the three conditions {Wx(x0), Wxx(x0), squared Wronskian} by Gram
/// reconstruction: with v = (phi, theta), v' = (phi', theta') at x0, the
/// quadratic form M obeys
///
/// ```text
/// v^T M v  = sqrt(2m)/Wx0
/// v^T M v' = -sqrt(2m) Wxx0 / (2 Wx0^2)
/// det(M) * W{phi,theta}^2 = (v^T M v)(v'^T M v') - (v^T M v')^2
/// ```
///
/// and det(M) = 2m / (hbar W)^2, so the remaining Gram entry v'^T M v' is
/// determined. Returns [`Error::Singular`] when (v, v') are too close to
/// parallel for the reconstruction to be trustworthy.
pub fn microstate_from_initial_values(iv: &InitialValues, basis: &BasisPair) -> Result<Microstate> {
    if !(iv.wx0 > 0.0) {
        return Err(Error::Domain(format!(
            "initial momentum must be positive, got {}",
            iv.wx0
        )));
    }
    if anchor_condition(basis, iv.x0)? < ANCHOR_CONDITION_SIN {
        return Err(Error::Singular(format!(
            "anchor x0 = {} leaves the basis pair numerically parallel; \
             re-anchor the data toward the allowed region",
            iv.x0
        )));
    }
    let v = basis.eval(iv.x0)?;
    let ctx = basis.context();
    let w = v.phi * v.theta_prime - v.phi_prime * v.theta;
    let sm = (2.0 * ctx.mass).sqrt();
    let g0 = sm / iv.wx0;
    let g1 = -sm * iv.wxx0 / (2.0 * iv.wx0 * iv.wx0);
    // det(M) * W^2 = 2m / hbar^2 exactly, independent of W itself
    let y = (2.0 * ctx.mass / (ctx.hbar * ctx.hbar) + g1 * g1) / g0;
    // M = T^{-T} B T^{-1} with T = [v v'] (columns) and B = [[g0 g1][g1 y]]
    let (p, pp, t, tp) = (v.phi, v.phi_prime, v.theta, v.theta_prime);
    let c00 = (g0 * tp - g1 * t) / w;
    let c01 = (-g0 * pp + g1 * p) / w;
    let c10 = (g1 * tp - y * t) / w;
    let c11 = (-g1 * pp + y * p) / w;
    let m00 = (tp * c00 - t * c10) / w;
    let m01 = (tp * c01 - t * c11) / w;
    let m10 = (-pp * c00 + p * c10) / w;
    let m11 = (-pp * c01 + p * c11) / w;
    Microstate::new(m00, m11, m01 + m10)
}

/// Classical momentum and elapsed time at `x` for the scenario's
/// potential, used as the correspondence-limit reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalReference {
    /// sqrt(2 m (E - V(x))).
    pub momentum: f64,
    /// Elapsed time: sqrt(m / 2E) * x from the origin where V = 0;
    /// sqrt(2 m (E - f x)) / f (time to the turning point) for V = f x.
    pub time: f64,
}

/// Classical reference values at `x`; [`Error::Domain`] where the point is
/// classically forbidden (E <= V(x)).
pub fn classical_reference(
    ctx: &PhysicalContext,
    potential: &Potential,
    x: f64,
) -> Result<ClassicalReference> {
    let v = potential.value(x);
    if ctx.energy <= v {
        return Err(Error::Domain(format!(
            "x = {x} is classically forbidden: E = {} <= V = {v}",
            ctx.energy
        )));
    }
    let momentum = (2.0 * ctx.mass * (ctx.energy - v)).sqrt();
    let time = match potential {
        Potential::Free => (ctx.mass / (2.0 * ctx.energy)).sqrt() * x,
        Potential::SquareWell { .. } => (ctx.mass / (2.0 * ctx.energy)).sqrt() * x,
        Potential::Linear { force } => momentum / force,
    };
    Ok(ClassicalReference { momentum, time })
}
