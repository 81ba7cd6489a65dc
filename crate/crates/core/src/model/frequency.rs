use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::RlmProvider;
use crate::functions::{k_hat, ModelParams};
use crate::liouville::{outer, OperatorMatrix, SuperOperator};
use crate::{c64, Error, Result, I};

/// Known singularities of `Π̂(E)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleCatalog {
    /// `0`, `−iΓ`, `ε − iΓ/2`, `−ε − iΓ/2`.
    pub isolated: Vec<Complex64>,
    /// `ηΔ − iΓ/2 − iπT(2n+1)` for `η = ±`, `n = 0..=n_max`, ordered by `n`
    /// then `η = +, −`.
    pub ladder: Vec<Complex64>,
}

impl PoleCatalog {
    pub fn new(theta: &ModelParams, n_max: usize) -> Self {
        let gamma = theta.gamma;
        let eps = theta.epsilon;
        let delta = theta.detuning();
        let isolated = vec![c64(0.0, 0.0), c64(0.0, -gamma), c64(eps, -0.5 * gamma), c64(-eps, -0.5 * gamma)];
        let mut ladder = Vec::with_capacity(2 * (n_max + 1));
        for n in 0..=n_max {
            let im = -0.5 * gamma - std::f64::consts::PI * theta.temperature * (2 * n + 1) as f64;
            for eta in [1.0, -1.0] {
                ladder.push(c64(eta * delta, im));
            }
        }
        Self { isolated, ladder }
    }

    pub fn all(&self) -> impl Iterator<Item = &Complex64> {
        self.isolated.iter().chain(self.ladder.iter())
    }

    /// Distance from `e` to the nearest catalog entry.
    pub fn distance(&self, e: Complex64) -> f64 {
        self.all().map(|p| (p - e).norm()).fold(f64::INFINITY, f64::min)
    }
}

impl RlmProvider {
    fn k_hat_shifted(&self, e: Complex64) -> Result<Complex64> {
        k_hat(e + c64(0.0, 0.5 * self.params().gamma), self.params())
    }

    /// `K̂(E) = [H,•] + i(Γ/2) Σ_η [1 − η k̂(E + iΓ/2)] D_η`.
    pub fn memory_kernel_hat(&self, e: Complex64) -> Result<SuperOperator> {
        let kh = self.k_hat_shifted(e)?;
        let gamma = self.params().gamma;
        let mut kernel = crate::liouville::commutator_superop(&self.hamiltonian());
        for eta in [1.0, -1.0] {
            let w = I * (0.5 * gamma) * (c64(1.0, 0.0) - kh * eta);
            kernel = &kernel + &Self::dissipator_eta(eta).scale(w);
        }
        Ok(kernel)
    }

    /// `i(E − K̂(E))⁻¹`.
    pub fn resolvent_from_kernel(&self, e: Complex64) -> Result<SuperOperator> {
        let kernel = self.memory_kernel_hat(e)?;
        let shifted = &SuperOperator::identity(2).scale(e) - &kernel;
        Ok(shifted.try_inverse()?.scale(I))
    }

    /// Closed-form Laplace transform `Π̂(E) = ∫₀^∞ e^{iEt} Π(t) dt`,
    /// continued to the whole plane.
    pub fn propagator_hat(&self, e: Complex64) -> Result<SuperOperator> {
        let gamma = self.params().gamma;
        let eps = self.params().epsilon;
        let guard = 1e-12 * gamma.abs().max(eps.abs()).max(1.0);
        for pole in &self.pole_catalog(0).isolated {
            if (e - pole).norm() <= guard {
                return Err(Error::Pole(format!("Π̂ pole at E = {pole}")));
            }
        }
        let kh = self.k_hat_shifted(e)?;
        let one = OperatorMatrix::identity(2);
        let parity = Self::parity();
        let half = c64(0.5, 0.0);
        let mut out = SuperOperator::zeros(2);
        for eta in [1.0, -1.0] {
            let mode = Self::d_eta(eta).dagger();
            let weight = I / (e + c64(eta * eps, 0.5 * gamma));
            out = &out + &outer(&mode, &mode).scale(weight);
        }
        let stationary = (&one + &parity.scale(kh)).scale(half);
        out = &out + &outer(&stationary, &one).scale(I / e);
        // Bra ⟨P| − k̂⟨𝟙| corresponds to the ket P − k̂* 𝟙.
        let parity_bra = (&parity - &one.scale(kh.conj())).scale(half);
        out = &out + &outer(&parity, &parity_bra).scale(I / (e + c64(0.0, gamma)));
        Ok(out)
    }

    pub fn pole_catalog(&self, n_max: usize) -> PoleCatalog {
        PoleCatalog::new(self.params(), n_max)
    }

    /// Growth of `max‖Π̂‖` when the radius of a circle around `e0` shrinks
    /// tenfold; a simple pole gives about 10, a regular point about 1.
    pub fn pole_growth(&self, e0: Complex64, radius: f64) -> Result<f64> {
        let sample = |r: f64| -> Result<f64> {
            let mut m: f64 = 0.0;
            for j in 0..16 {
                let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / 16.0;
                let e = e0 + Complex64::from_polar(r, phi);
                m = m.max(self.propagator_hat(e)?.max_abs());
            }
            Ok(m)
        };
        Ok(sample(0.1 * radius)? / sample(radius)?)
    }
}
