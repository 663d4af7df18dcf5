//! Error taxonomy shared by every numerical routine in the crate.
//!
//! Each variant names the failure mode rather than the call site, so callers
//! can match on what went wrong (a quadrature that refused to converge, a
//! bracket without a sign change, an off-spectrum energy, ...) without
//! string-sniffing.

use thiserror::Error;

/// Unified error type for the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument left the mathematical domain of the operation
    /// (non-positive mass, indefinite microstate form, E below the
    /// potential where a classical momentum was requested, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A special-function evaluation cannot be completed at this argument.
    #[error("evaluation error: {0}")]
    Eval(String),

    /// A linear system lost conditioning at the requested anchor point; the
    /// data do not determine the unknowns to working precision.
    #[error("singular anchor: {0}")]
    Singular(String),

    /// An intermediate value would exceed the floating-point range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// An iterated quadrature failed to reach the requested tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    /// A finite-difference step underflowed relative to the base point.
    #[error("derivative step underflow: {0}")]
    Step(String),

    /// A root bracket does not straddle a sign change.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// The supplied energy is not an eigenvalue of the bound problem.
    #[error("not an eigenvalue: {0}")]
    Eigenvalue(String),

    /// A bound level with the requested index does not exist.
    #[error("no such bound level: {0}")]
    NoLevel(String),

    /// Branch unwrapping of the reduced action lost monotonicity, which
    /// indicates an internal inconsistency or invalid inputs.
    #[error("branch unwrap failure: {0}")]
    Unwrap(String),

    /// A user-supplied configuration value (sweep grid, scenario field, ...)
    /// fails validation before any numerics run.
    #[error("configuration error: {0}")]
    Config(String),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
