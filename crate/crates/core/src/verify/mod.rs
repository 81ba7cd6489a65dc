//! Residual checks of fermionic duality relations and sum rules.
//!
//! Every check evaluates both sides of a relation on a [`SuperOpFamily`] and
//! returns a [`ResidualReport`]. Checks never panic on bad input: missing
//! callbacks, ill-conditioned inversions and ambiguous pairings end up as
//! failed reports carrying the error message.

mod family;
mod fixed_point;
mod kraus_jump;
mod relations;
mod report;
mod suite;

pub use family::{
    parity_covariance_residual, parity_superop, FamilyJson, FamilySample, RecordingFamily, RlmFamily, SampleArg,
    SampleKind, SampledFamily, SuperOpFamily,
};
pub use fixed_point::{
    check_fixed_point_stationary, check_functional_fixed_point, functional_fixed_point_residual,
    stationary_rhs_quadrature, stationary_rhs_sampled, Picture,
};
pub use kraus_jump::{
    check_jump_duality, check_kraus_duality, check_kraus_sum_rules, check_kraus_sum_rules_family,
    kraus_sum_rule_residuals,
};
pub use relations::{
    check_choi_duality, check_generator_duality, check_kernel_duality, check_propagator_duality,
    check_spectral_cross_relations, default_frequencies, heisenberg_generator, CheckOptions, CrossTarget,
    MAX_CONDITION,
};
pub use report::{ResidualReport, SamplePoint};
pub use suite::{default_thetas, export_family, run_suite, SuiteConfig, SuiteTolerances};
