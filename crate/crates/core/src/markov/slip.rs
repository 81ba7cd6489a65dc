use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::functions::k_hat;
use crate::quadrature::integrate;
use crate::liouville::{outer, spectral_decompose, OperatorMatrix, SuperOperator};
use crate::model::RlmProvider;
use crate::{c64, Error, Result, I};

/// Number of nodes of the residue contour.
pub const CONTOUR_POINTS: usize = 32;
/// Stationary eigenvalues closer than this are a pole collision.
pub const POLE_COLLISION_TOL: f64 = 1e-9;
/// Default contour radius in units of `|Γ|`.
const CONTOUR_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlipConstruction {
    ResidueSum,
    ClosedForm,
}

/// Initial-slip superoperator `S`.
#[derive(Debug, Clone)]
pub struct SlipOperator {
    pub matrix: SuperOperator,
    pub construction: SlipConstruction,
    /// `(g_i, −i Res Π̂(g_i))` for the residue construction.
    pub residues: Vec<(Complex64, SuperOperator)>,
}

/// Poles of `Π̂` at the eigenvalues `{0, −ηε − iΓ/2, −iΓ}` of `G(∞)`.
fn stationary_poles(rlm: &RlmProvider) -> Vec<Complex64> {
    let gamma = rlm.params().gamma;
    let eps = rlm.params().epsilon;
    vec![c64(0.0, 0.0), c64(-eps, -0.5 * gamma), c64(eps, -0.5 * gamma), c64(0.0, -gamma)]
}

fn check_collisions(poles: &[Complex64]) -> Result<()> {
    for (i, a) in poles.iter().enumerate() {
        for b in &poles[i + 1..] {
            if (a - b).norm() < POLE_COLLISION_TOL {
                return Err(Error::Pole(format!(
                    "stationary eigenvalues {a} and {b} collide; the slip needs first-order poles"
                )));
            }
        }
    }
    Ok(())
}

/// Contour radius around `center`: `10⁻³|Γ|`, shrunk to stay well inside
/// the distance to every other known singularity.
fn contour_radius(rlm: &RlmProvider, center: Complex64, poles: &[Complex64]) -> f64 {
    let th = rlm.params();
    let mut nearest = f64::INFINITY;
    for p in poles {
        let d = (p - center).norm();
        if d > 0.0 {
            nearest = nearest.min(d);
        }
    }
    let reach = (center.im.abs() + 0.5 * th.gamma.abs()) / (2.0 * PI * th.temperature) + 2.0;
    let catalog = rlm.pole_catalog(reach.ceil() as usize);
    for p in &catalog.ladder {
        nearest = nearest.min((p - center).norm());
    }
    (CONTOUR_RADIUS * th.gamma.abs()).min(0.25 * nearest)
}

/// `(1/2πi) ∮ f(E) dE` on a circle, by the trapezoid rule.
fn contour_residue(f: impl Fn(Complex64) -> Result<SuperOperator>, center: Complex64, radius: f64) -> Result<SuperOperator> {
    let mut acc: Option<SuperOperator> = None;
    for j in 0..CONTOUR_POINTS {
        let phi = 2.0 * PI * j as f64 / CONTOUR_POINTS as f64;
        let z = Complex64::from_polar(radius, phi);
        let term = f(center + z)?.scale(z / CONTOUR_POINTS as f64);
        acc = Some(match acc {
            None => term,
            Some(a) => &a + &term,
        });
    }
    Ok(acc.expect("nonempty contour"))
}

/// `S = −i Σ_i Res Π̂(g_i)` by contour quadrature of the closed-form `Π̂`.
pub fn slip_operator_residue(rlm: &RlmProvider) -> Result<SlipOperator> {
    let poles = stationary_poles(rlm);
    check_collisions(&poles)?;
    let mut matrix = SuperOperator::zeros(2);
    let mut residues = Vec::with_capacity(poles.len());
    for &g in &poles {
        let radius = contour_radius(rlm, g, &poles);
        let res = contour_residue(|e| rlm.propagator_hat(e), g, radius)?.scale(-I);
        matrix = &matrix + &res;
        residues.push((g, res));
    }
    Ok(SlipOperator { matrix, construction: SlipConstruction::ResidueSum, residues })
}

/// `S = 𝟙 + ½[k̂(iΓ/2) − k̂(−iΓ/2)] |(−1)^N⟩⟨𝟙|`, with the undetermined
/// coherence term set to zero.
pub fn slip_operator_closed_form(rlm: &RlmProvider) -> Result<SlipOperator> {
    let th = rlm.params();
    let half = 0.5 * th.gamma;
    let upper = k_hat(c64(0.0, half), th)?;
    let lower = k_hat(c64(0.0, -half), th)
        .map_err(|_| Error::Pole(format!("k̂(−iΓ/2) diverges at Γ = {}, T = {}", th.gamma, th.temperature)))?;
    let c = 0.5 * (upper - lower);
    let one = OperatorMatrix::identity(2);
    let matrix = &SuperOperator::identity(2) + &outer(&RlmProvider::parity(), &one).scale(c);
    Ok(SlipOperator { matrix, construction: SlipConstruction::ClosedForm, residues: Vec::new() })
}

/// The closed-form slip; see [`slip_operator_residue`] for the generic path.
pub fn slip_operator(rlm: &RlmProvider) -> Result<SlipOperator> {
    slip_operator_closed_form(rlm)
}

/// Behaviour of the naive limit `lim_{t→∞} e^{iG(∞)t} Π(t)`.
#[derive(Debug, Clone, Serialize)]
pub struct NaiveLimitReport {
    pub times: Vec<f64>,
    /// `‖e^{iG(∞)t}Π(t)‖_max` at `times`.
    pub norms: Vec<f64>,
    /// True when the norm exceeded `divergence_bound` before the horizon.
    pub diverges: bool,
    pub divergence_bound: f64,
    /// Distance between the last sampled value and `S` when the limit exists.
    pub distance_to_slip: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RegularizedSlip {
    pub matrix: SuperOperator,
    pub naive: NaiveLimitReport,
}

/// `e^{Γt} ∫_t^∞ e^{−Γs/2} k(s) ds`, evaluated as
/// `∫₀^∞ e^{Γ(t−u)/2} k(t+u) du` with the growing and decaying exponentials
/// merged so that large `t` neither overflows nor underflows.
fn scaled_tail(rlm: &RlmProvider, t: f64) -> Result<f64> {
    let th = rlm.params();
    let (delta, temp, gamma) = (th.detuning(), th.temperature, th.gamma);
    if delta == 0.0 {
        return Ok(0.0);
    }
    let decay = 0.5 * gamma + PI * temp;
    let f = |u: f64| {
        let x = PI * temp * (t + u);
        let growth = 0.5 * gamma * (t - u);
        if x == 0.0 {
            return 2.0 * delta / PI * growth.exp();
        }
        // 2T sin/sinh(x) = 4T sin e^{−x}/(1 − e^{−2x}).
        4.0 * temp * (delta * (t + u)).sin() * (growth - x).exp() / -(-2.0 * x).exp_m1()
    };
    let end = 45.0 / decay;
    let mut width = (1.0 / (PI * temp)).min(4.0 / gamma.abs().max(f64::MIN_POSITIVE));
    width = width.min(PI / delta.abs());
    Ok(integrate(f, 0.0, end, width.min(end), rlm.quadrature().tolerance())?.value)
}

/// `e^{iG(∞)t}Π(t) = 𝟙 + ½[g(∞) + σ(t)] |(−1)^N⟩⟨𝟙|` with
/// `σ(t) = ḡ(t) − e^{Γt} ∫_t^∞ e^{−Γs/2} k(s) ds`.
fn naive_product(rlm: &RlmProvider, t: f64, g_inf: f64) -> Result<SuperOperator> {
    let sigma = rlm.g_dual(t)? - scaled_tail(rlm, t)?;
    let coefficient = c64(0.5 * (g_inf + sigma), 0.0);
    Ok(&SuperOperator::identity(2) + &outer(&RlmProvider::parity(), &OperatorMatrix::identity(2)).scale(coefficient))
}

/// `S = −i Res_{E=0} L[e^{iG(∞)t}Π(t)](E)`.
///
/// With the spectral projectors `P_i` of `G(∞)` the Laplace transform is
/// `Σ_i P_i Π̂(E + g_i)`, which is continued to `E = 0` through the
/// closed-form `Π̂` and integrated on a small circle. The naive time limit is
/// sampled on a doubling time grid up to `horizon` and reported alongside.
pub fn regularized_slip_limit(rlm: &RlmProvider, horizon: f64, divergence_bound: f64) -> Result<RegularizedSlip> {
    let g_inf_op = rlm.stationary_generator()?;
    let sd = spectral_decompose(&g_inf_op)?;
    let poles: Vec<Complex64> = sd.modes.iter().map(|m| m.eigenvalue).collect();
    check_collisions(&poles)?;
    let radius = poles.iter().map(|&g| contour_radius(rlm, g, &poles)).fold(f64::INFINITY, f64::min);
    let laplace = |e: Complex64| -> Result<SuperOperator> {
        let mut acc = SuperOperator::zeros(2);
        for mode in &sd.modes {
            acc = &acc + &(&mode.projector() * &rlm.propagator_hat(e + mode.eigenvalue)?);
        }
        Ok(acc)
    };
    let matrix = contour_residue(laplace, c64(0.0, 0.0), radius)?.scale(-I);

    let gamma = rlm.params().gamma.abs();
    let g_inf = rlm.g_stationary()?;
    let mut times = Vec::new();
    let mut norms = Vec::new();
    let mut diverges = false;
    let mut last = None;
    let mut t = 1.0 / gamma.max(f64::MIN_POSITIVE);
    while t <= horizon {
        let value = naive_product(rlm, t, g_inf)?;
        let norm = value.max_abs();
        times.push(t);
        norms.push(norm);
        if !(norm <= divergence_bound) {
            diverges = true;
            break;
        }
        last = Some(value);
        t *= 2.0;
    }
    let distance_to_slip = if diverges { None } else { last.map(|v| v.max_abs_diff(&matrix)) };
    Ok(RegularizedSlip { matrix, naive: NaiveLimitReport { times, norms, diverges, divergence_bound, distance_to_slip } })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::ModelParams;
    use crate::liouville::{is_tp, superadjoint};

    fn rlm(delta: f64, temp: f64, gamma: f64) -> RlmProvider {
        RlmProvider::new(ModelParams::new(0.1 + delta, 0.1, temp, gamma).unwrap())
    }

    #[test]
    fn residue_and_closed_form_agree() {
        let r = rlm(0.5, 0.25, 1.0);
        let a = slip_operator_residue(&r).unwrap();
        let b = slip_operator_closed_form(&r).unwrap();
        assert!(a.matrix.max_abs_diff(&b.matrix) < 1e-6, "{}", a.matrix.max_abs_diff(&b.matrix));
        assert!(is_tp(&a.matrix, 1e-9));
        assert_eq!(a.residues.len(), 4);
    }

    #[test]
    fn slip_duality() {
        let r = rlm(0.5, 0.25, 1.0);
        let s = slip_operator(&r).unwrap().matrix;
        let s_dual = slip_operator(&r.dual()).unwrap().matrix;
        let p = RlmProvider::parity_superop();
        assert!(superadjoint(&s).max_abs_diff(&(&(&p * &s_dual) * &p)) < 1e-12);
        let s_dual_res = slip_operator_residue(&r.dual()).unwrap().matrix;
        assert!(s_dual_res.max_abs_diff(&s_dual) < 1e-6);
    }

    #[test]
    fn collision_is_refused() {
        let r = RlmProvider::new(ModelParams::new(0.0, 0.3, 0.25, 1.0).unwrap());
        assert!(matches!(slip_operator_residue(&r), Err(Error::Pole(_))));
    }

    #[test]
    fn hot_reservoir_has_trivial_slip() {
        let r = rlm(0.5, 1e4, 1.0);
        let s = slip_operator(&r).unwrap().matrix;
        assert!(s.max_abs_diff(&SuperOperator::identity(2)) < 1e-4);
    }

    #[test]
    fn naive_limit_below_and_above_threshold() {
        let below = rlm(0.5, 1.0 / PI, 1.0);
        let reg = regularized_slip_limit(&below, 200.0, 1e6).unwrap();
        assert!(!reg.naive.diverges);
        assert!(reg.naive.distance_to_slip.unwrap() < 1e-6, "{:?}", reg.naive);
        assert!(reg.matrix.max_abs_diff(&slip_operator(&below).unwrap().matrix) < 1e-5);

        let above = rlm(0.5, 1.0 / (3.0 * PI), 1.0);
        let reg = regularized_slip_limit(&above, 1e3, 1e6).unwrap();
        assert!(reg.naive.diverges, "{:?}", reg.naive);
        assert!(reg.matrix.max_abs() < 1e3);
        assert!(reg.matrix.max_abs_diff(&slip_operator(&above).unwrap().matrix) < 1e-5);
    }
}
