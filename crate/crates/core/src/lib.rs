//! Exact open-system dynamics of the wide-band resonant level model and a
//! numerical verification engine for fermionic duality relations.
//!
//! The crate is organised bottom-up:
//!
//! * [`liouville`]: dense superoperator algebra (vectorization, Choi
//!   operators, spectral, Kraus and jump decompositions).
//! * [`functions`]: the scalar functions `k`, `g`, `p`, the complex digamma
//!   function and the Laplace-transformed kernel.
//! * [`model`]: closed-form providers for all representations of the
//!   resonant level model.
//! * [`verify`]: residual checks of duality relations and sum rules.
//! * [`markov`]: semigroup and initial-slip approximations.

pub mod error;
pub mod functions;
pub mod liouville;
pub mod markov;
pub mod model;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Imaginary unit.
pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Shorthand for building a complex number.
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
