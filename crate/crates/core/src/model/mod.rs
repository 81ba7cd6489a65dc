//! Closed-form providers for the resonant level model.
//!
//! The system is a single fermionic level with basis `{|0⟩, |1⟩}`,
//! annihilator `d = |0⟩⟨1|`, number operator `N = d†d` and parity
//! `(−1)^N = diag(1, −1)`. Jump operators are labelled `d_+ = d†` and
//! `d_− = d`.

mod divisibility;
mod frequency;
mod provider;

pub use divisibility::{divisibility_max, DivisibilityMax, ScanConfig, Which};
pub use frequency::PoleCatalog;
pub use provider::RlmProvider;
pub(crate) use provider::check_time;
