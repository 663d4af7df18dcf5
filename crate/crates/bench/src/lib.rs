//! Shared scenario builders for the benchmark suite: one representative
//! basis pair per potential, built from the same tilted microstate so the
//! kernels see comparable work.

use floydlab_core::{
    basis_free, basis_linear, basis_square_well, solve_symmetric_levels, BasisPair, Microstate,
    PhysicalContext,
};

/// A microstate with every coefficient active, so no kernel term drops out.
pub fn tilted_microstate() -> Microstate {
    Microstate::new(1.3, 0.8, 0.4).expect("triple is positive definite")
}

/// Unit mass and hbar at the given energy.
pub fn unit_context(energy: f64) -> PhysicalContext {
    PhysicalContext::new(1.0, 1.0, energy).expect("energy is positive")
}

/// Free-motion basis pair at E = 0.7.
pub fn free_pair() -> BasisPair {
    basis_free(&unit_context(0.7), &tilted_microstate()).expect("valid free scenario")
}

/// Ground-level basis pair of the U = 50, q = 1 square well.
pub fn well_ground_pair() -> BasisPair {
    let probe = unit_context(25.0);
    let spectrum = solve_symmetric_levels(&probe, 50.0, 1.0).expect("well has bound levels");
    let ground = spectrum.levels[0];
    basis_square_well(&unit_context(ground.energy), &tilted_microstate(), 50.0, 1.0)
        .expect("ground energy is on shell")
}

/// Linear-ramp basis pair with E = 2 and unit force.
pub fn linear_pair() -> BasisPair {
    basis_linear(&unit_context(2.0), &tilted_microstate(), 1.0).expect("valid ramp scenario")
}
