//! Special functions and numerical kernels: Airy pairs, periodic and
//! Romberg quadrature, finite-difference derivatives, and bracketed root
//! finding. Everything downstream (basis construction, momentum fields,
//! trajectory timing) is built on these four primitives.

pub mod airy;
pub mod diff;
pub mod quad;
pub mod roots;

pub use airy::{airy_eval, AiryValues, AIRY_AI_PRIME_ZERO, AIRY_AI_ZERO, AIRY_ARG_MAX, AIRY_BI_PRIME_ZERO, AIRY_BI_ZERO};
pub use diff::{numeric_derivative, numeric_derivative_auto, DerivativeEstimate};
pub use quad::{cycle_average, romberg, Quadrature};
pub use roots::find_root;
