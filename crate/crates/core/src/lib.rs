//! Trajectory-level quantum mechanics at fixed energy.
//!
//! This crate evaluates the trajectory representation of stationary
//! quantum problems: the momentum field Wx and reduced action W selected
//! by a microstate (a, b, c), the quantum stationary Hamilton-Jacobi
//! residual that certifies them, trajectory times from the energy
//! derivative of the action, and the cycle-averaged statistics through
//! which the classical limit emerges.
//!
//! Supported potentials: free motion, the symmetric finite square well
//! (bound levels), and the uniform-force linear ramp.

pub mod basis;
pub mod correspondence;
pub mod dynamics;
pub mod error;
pub mod model;
pub mod qshje;
pub mod specfun;
pub mod squarewell;

pub use basis::{
    basis_free, basis_linear, basis_square_well, square_well_offshell, BasisPair, BasisValues,
    Potential,
};
pub use dynamics::{
    cycle_averaged_time_free, energy_family, principal_function, sample_trajectory,
    trajectory_time, trajectory_time_free_closed, trajectory_time_linear_closed,
    transition_width, Trajectory, TrajectorySample, TransitionWidth,
};
pub use error::{Error, Result};
pub use model::{
    classical_reference, make_microstate, microstate_from_initial_values,
    microstate_to_initial_values, ClassicalReference, InitialValues, Microstate, PhysicalContext,
};
pub use correspondence::{
    collect_sweep, cycle_stats, cycle_stats_closed, geometric_grid, indeterminacy_envelope,
    limit_sweep, sweep_point, validate_sweep_grid, CycleStats, Envelope, SweepAxis,
    SweepDiagnostics, SweepPoint, SweepResult, SweepScenario,
};
pub use qshje::{
    conjugate_momentum, momentum_derivatives, qshje_residual, reduced_action, sample,
    schwarzian, MomentumDerivatives, QshjePoint,
};
pub use squarewell::{
    dwell_time, fractional_forbidden_time, libration_period, solve_symmetric_levels,
    timing_report, Side, TimingReport, WellLevel, WellSpectrum,
};
