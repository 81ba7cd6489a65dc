//! Nonperturbative semigroup and initial-slip approximations of the
//! resonant level dynamics.
//!
//! The semigroup approximation is `Π⁽¹⁾(t) = e^{−iG(∞)t}`; the slip
//! approximation `Π⁽²⁾(t) = e^{−iG(∞)t} S` adds a constant superoperator `S`
//! built from the residues of `Π̂(E)` at the eigenvalues of `G(∞)`.

mod breakdown;
mod onset;
mod semigroup;
mod slip;

pub use breakdown::{breakdown_locator, BreakdownConfig};
pub use onset::{cp_onset_time, default_onset_horizon, CpOnset, OnsetConfig};
pub use semigroup::{
    frequency_error, heisenberg_stationary_generator, ring_error, semigroup_propagator, slip_propagator,
    stationary_state, Approximation, HeisenbergStationary,
};
pub use slip::{
    regularized_slip_limit, slip_operator, slip_operator_closed_form, slip_operator_residue, NaiveLimitReport,
    RegularizedSlip, SlipConstruction, SlipOperator, CONTOUR_POINTS, POLE_COLLISION_TOL,
};
