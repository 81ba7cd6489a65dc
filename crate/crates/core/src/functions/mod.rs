//! Scalar functions of the resonant level model.
//!
//! With detuning `Δ = ε − μ`:
//!
//! * `k(t) = 2T sin(Δt) / sinh(πTt)`, the reservoir memory function;
//! * `g(t) = ∫₀ᵗ e^{−Γs/2} k(s) ds`, entering the time-local generator;
//! * `p(t)`, entering the exponential form of the propagator;
//! * `k̂(ω) = ∫₀^∞ e^{iωt} k(t) dt`, continued analytically through the
//!   digamma function.

mod digamma;
mod params;
mod scalars;

pub use digamma::digamma;
pub use params::{ModelParams, QuadratureConfig};
pub use scalars::{
    g_dual_of_t, g_increment, g_infinity_quadrature, g_of_t, k_hat, k_of_t, k_pole, p_of_t, stationary_g,
};
