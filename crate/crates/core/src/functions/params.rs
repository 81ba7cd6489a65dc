use serde::{Deserialize, Serialize};

use crate::quadrature::Tolerance;
use crate::{Error, Result};

/// Physical parameters of the model: level energy, reservoir potential,
/// temperature and tunnel-coupling rate.
///
/// Negative `gamma` (with mirrored energies) encodes the dual parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub epsilon: f64,
    pub mu: f64,
    pub temperature: f64,
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(epsilon: f64, mu: f64, temperature: f64, gamma: f64) -> Result<Self> {
        let p = Self { epsilon, mu, temperature, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.epsilon, self.mu, self.temperature, self.gamma].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("model parameters must be finite".into()));
        }
        if self.temperature <= 0.0 {
            return Err(Error::InvalidInput(format!("temperature must be positive, got {}", self.temperature)));
        }
        Ok(())
    }

    /// `(ε, μ, Γ) → (−ε, −μ, −Γ)` with `T` unchanged.
    pub fn dual(&self) -> Self {
        Self { epsilon: -self.epsilon, mu: -self.mu, temperature: self.temperature, gamma: -self.gamma }
    }

    /// `ε − μ`.
    pub fn detuning(&self) -> f64 {
        self.epsilon - self.mu
    }

    /// True for `Γ ≥ 0`, i.e. a parameter set describing a real reservoir.
    pub fn is_physical(&self) -> bool {
        self.gamma >= 0.0
    }

    /// Bit patterns of the four fields, usable as an exact hash key.
    pub fn key(&self) -> [u64; 4] {
        [self.epsilon.to_bits(), self.mu.to_bits(), self.temperature.to_bits(), self.gamma.to_bits()]
    }

    /// Copy with the coupling rescaled, keeping everything else.
    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..*self }
    }
}

/// Numerical settings for the time integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Cap on improper-integral horizons, in units of `1/max(|Γ|, πT)`.
    pub t_max_factor: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, t_max_factor: 60.0, max_subdivisions: 20_000 }
    }
}

impl QuadratureConfig {
    pub fn tolerance(&self) -> Tolerance {
        Tolerance { abs: self.abs_tol, rel: self.rel_tol, max_subdivisions: self.max_subdivisions }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dual_map() {
        let p = ModelParams::new(1.0, 0.5, 0.3, 2.0).unwrap();
        assert_eq!(p.dual(), ModelParams { epsilon: -1.0, mu: -0.5, temperature: 0.3, gamma: -2.0 });
        assert_eq!(p.dual().dual(), p);
        let z = ModelParams::new(0.0, 0.0, 1.0, 1.0).unwrap().dual();
        assert_eq!((z.epsilon, z.mu, z.gamma), (0.0, 0.0, -1.0));
    }

    #[test]
    fn rejects_nonpositive_temperature() {
        assert!(ModelParams::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(ModelParams::new(f64::NAN, 0.0, 1.0, 1.0).is_err());
    }
}
