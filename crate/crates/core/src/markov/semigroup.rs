use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::slip::SlipOperator;
use crate::liouville::{superadjoint, OperatorMatrix, SuperOperator};
use crate::model::RlmProvider;
use crate::{Error, Result, I};

/// Which propagator approximates `Π`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Approximation {
    /// `e^{−iG(∞)t}`.
    Semigroup,
    /// `e^{−iG(∞)t} S`.
    Slip,
}

pub fn semigroup_propagator(rlm: &RlmProvider, t: f64) -> Result<SuperOperator> {
    crate::model::check_time(t)?;
    Ok(rlm.stationary_generator()?.scale(-I * t).exp())
}

pub fn slip_propagator(rlm: &RlmProvider, slip: &SlipOperator, t: f64) -> Result<SuperOperator> {
    Ok(&semigroup_propagator(rlm, t)? * &slip.matrix)
}

/// Zero mode of `G(∞)`, normalized to unit trace.
pub fn stationary_state(rlm: &RlmProvider) -> Result<OperatorMatrix> {
    let sd = rlm.stationary_generator_spectral()?;
    let mode = sd
        .modes
        .iter()
        .min_by(|a, b| a.eigenvalue.norm().total_cmp(&b.eigenvalue.norm()))
        .ok_or_else(|| Error::Singular("empty spectrum".into()))?;
    let tr = mode.right.trace();
    if tr.norm() < 1e-14 {
        return Err(Error::Singular("stationary mode has zero trace".into()));
    }
    Ok(mode.right.scale(tr.inv()))
}

/// Laplace transform of the approximate propagator:
/// `i(E − G(∞))⁻¹`, optionally followed by `S`.
fn approximate_hat(rlm: &RlmProvider, approx: Approximation, slip: &SlipOperator, e: Complex64) -> Result<SuperOperator> {
    let g_inf = rlm.stationary_generator()?;
    let shifted = &SuperOperator::identity(2).scale(e) - &g_inf;
    let base = shifted.try_inverse()?.scale(I);
    Ok(match approx {
        Approximation::Semigroup => base,
        Approximation::Slip => &base * &slip.matrix,
    })
}

/// `‖Π̂(E) − Π̂_approx(E)‖_max`.
pub fn frequency_error(rlm: &RlmProvider, approx: Approximation, slip: &SlipOperator, e: Complex64) -> Result<f64> {
    Ok(rlm.propagator_hat(e)?.max_abs_diff(&approximate_hat(rlm, approx, slip, e)?))
}

/// Largest [`frequency_error`] on a 16-point ring of the given radius.
pub fn ring_error(
    rlm: &RlmProvider,
    approx: Approximation,
    slip: &SlipOperator,
    center: Complex64,
    radius: f64,
) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for j in 0..16 {
        let z = center + Complex64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / 16.0);
        worst = worst.max(frequency_error(rlm, approx, slip, z)?);
    }
    Ok(worst)
}

/// Heisenberg-picture stationary generator of the slip approximation.
#[derive(Debug, Clone)]
pub struct HeisenbergStationary {
    /// `[S⁻¹ G(∞) S]‡`.
    pub from_slip: SuperOperator,
    /// `iΓ𝟙 − 𝒫 G(∞)|dual 𝒫`.
    pub from_dual: SuperOperator,
    pub residual: f64,
}

pub fn heisenberg_stationary_generator(rlm: &RlmProvider, slip: &SlipOperator) -> Result<HeisenbergStationary> {
    let g_inf = rlm.stationary_generator()?;
    let conjugated = &(&slip.matrix.try_inverse()? * &g_inf) * &slip.matrix;
    let from_slip = superadjoint(&conjugated);
    let p = RlmProvider::parity_superop();
    let dual_g = rlm.dual().stationary_generator()?;
    let gamma = rlm.params().gamma;
    let from_dual = &SuperOperator::identity(2).scale(I * gamma) - &(&(&p * &dual_g) * &p);
    let residual = from_slip.max_abs_diff(&from_dual);
    Ok(HeisenbergStationary { from_slip, from_dual, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::ModelParams;
    use crate::markov::slip_operator;

    fn rlm() -> RlmProvider {
        RlmProvider::new(ModelParams::new(0.6, 0.1, 0.25, 1.0).unwrap())
    }

    #[test]
    fn semigroup_reaches_stationary_state() {
        let r = rlm();
        let rho0 = OperatorMatrix::diagonal(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let late = r.propagator(60.0).unwrap().apply(&rho0);
        let approx = semigroup_propagator(&r, 60.0).unwrap().apply(&rho0);
        let rho_inf = stationary_state(&r).unwrap();
        assert!(late.max_abs_diff(&rho_inf) < 1e-10);
        assert!(approx.max_abs_diff(&rho_inf) < 1e-10);
    }

    #[test]
    fn slip_is_exact_at_late_times() {
        let r = rlm();
        let s = slip_operator(&r).unwrap();
        let t = 30.0;
        let exact = r.propagator(t).unwrap();
        let slip = slip_propagator(&r, &s, t).unwrap();
        let semi = semigroup_propagator(&r, t).unwrap();
        assert!(exact.max_abs_diff(&slip) < 1e-10);
        assert!(exact.max_abs_diff(&slip) < exact.max_abs_diff(&semi));
    }

    #[test]
    fn slip_removes_the_pole_mismatch() {
        let r = rlm();
        let s = slip_operator(&r).unwrap();
        let center = Complex64::new(0.0, -1.0);
        let semi = ring_error(&r, Approximation::Semigroup, &s, center, 0.05).unwrap();
        let slip = ring_error(&r, Approximation::Slip, &s, center, 0.05).unwrap();
        assert!(slip < semi, "{slip} vs {semi}");
    }

    #[test]
    fn heisenberg_stationary_generator_matches_dual() {
        let r = rlm();
        let s = slip_operator(&r).unwrap();
        let h = heisenberg_stationary_generator(&r, &s).unwrap();
        assert!(h.residual < 1e-12, "{}", h.residual);
    }
}
