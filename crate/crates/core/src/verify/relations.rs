use num_complex::Complex64;
use serde_json::json;

use super::family::{parity_superop, SuperOpFamily};
use super::report::{worst, ResidualReport, SamplePoint};
use crate::functions::ModelParams;
use crate::liouville::{choi_duality_transform, choi_of, spectral_decompose, superadjoint, OperatorMatrix, SuperOperator};
use crate::{c64, Error, Result};

/// Condition number of `Π(t)` beyond which the similarity transform is
/// refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Tolerance and optional one-sided mutation for a check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckOptions {
    pub tol: f64,
    /// Factor applied to `Γ` on the right-hand side only; `1` for a genuine
    /// check, anything else to confirm that the check can fail.
    pub rhs_gamma_factor: f64,
}

impl CheckOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, rhs_gamma_factor: 1.0 }
    }

    pub fn with_rhs_gamma_factor(self, factor: f64) -> Self {
        Self { rhs_gamma_factor: factor, ..self }
    }

    /// Dual parameters and `Γ` as seen by the right-hand side.
    pub(crate) fn rhs_dual(&self, family: &dyn SuperOpFamily, theta: &ModelParams) -> (ModelParams, f64) {
        let dual = family.dual_map(theta);
        (dual.with_gamma(dual.gamma * self.rhs_gamma_factor), family.gamma_sum(theta) * self.rhs_gamma_factor)
    }

    /// Same-side parameters as seen by the right-hand side.
    pub(crate) fn rhs_same(&self, family: &dyn SuperOpFamily, theta: &ModelParams) -> (ModelParams, f64) {
        (theta.with_gamma(theta.gamma * self.rhs_gamma_factor), family.gamma_sum(theta) * self.rhs_gamma_factor)
    }
}

pub(crate) fn finish(
    id: &str,
    theta: &ModelParams,
    points: Vec<SamplePoint>,
    tol: f64,
    outcome: Result<(f64, serde_json::Value)>,
) -> ResidualReport {
    match outcome {
        Ok((r, witness)) => ResidualReport::new(id, *theta, points, r, tol).with_witness(witness),
        Err(e) => ResidualReport::failed(id, *theta, points, tol, &e),
    }
}

fn conjugate_by(p: &SuperOperator, s: &SuperOperator) -> SuperOperator {
    &(p * s) * p
}

fn shifted_identity(dim: usize, c: Complex64) -> SuperOperator {
    SuperOperator::identity(dim).scale(c)
}

/// Frequency `iΓ − E*` of the dual side.
pub(crate) fn dual_frequency(e: Complex64, gamma: f64) -> Complex64 {
    c64(0.0, gamma) - e.conj()
}

/// `Π(t)‡ = e^{−Γt} 𝒫 Π̄(t) 𝒫` at `times` and
/// `Π̂(E)‡ = 𝒫 Π̄̂(iΓ − E*) 𝒫` at `freqs`.
pub fn check_propagator_duality(
    family: &dyn SuperOpFamily,
    theta: &ModelParams,
    times: &[f64],
    freqs: &[Complex64],
    opts: &CheckOptions,
) -> ResidualReport {
    let mut points: Vec<SamplePoint> = times.iter().map(|&t| SamplePoint::Time(t)).collect();
    points.extend(freqs.iter().map(|e| SamplePoint::Frequency([e.re, e.im])));
    let outcome = (|| {
        let p = parity_superop(&family.parity_operator());
        let (dual, gamma) = opts.rhs_dual(family, theta);
        let mut time_res: f64 = 0.0;
        for &t in times {
            let lhs = superadjoint(&family.propagator(theta, t)?);
            let rhs = conjugate_by(&p, &family.propagator(&dual, t)?).scale(c64((-gamma * t).exp(), 0.0));
            time_res = worst(time_res, lhs.max_abs_diff(&rhs));
        }
        let mut freq_res: f64 = 0.0;
        for &e in freqs {
            let lhs = superadjoint(&family.propagator_hat(theta, e)?);
            let rhs = conjugate_by(&p, &family.propagator_hat(&dual, dual_frequency(e, gamma))?);
            freq_res = worst(freq_res, lhs.max_abs_diff(&rhs));
        }
        Ok((worst(time_res, freq_res), json!({ "time_residual": time_res, "frequency_residual": freq_res })))
    })();
    finish("propagator_duality", theta, points, opts.tol, outcome)
}

/// `K̂(E)‡ = iΓ𝟙 − 𝒫 K̄̂(iΓ − E*) 𝒫` at `freqs`; when the family provides the
/// time-domain kernel, also `K_δ‡ = iΓ𝟙 − 𝒫 K̄_δ 𝒫` for the `δ(t)` part and
/// `K_s(t)‡ = −e^{−Γt} 𝒫 K̄_s(t) 𝒫` for the smooth part at `times`.
pub fn check_kernel_duality(
    family: &dyn SuperOpFamily,
    theta: &ModelParams,
    freqs: &[Complex64],
    times: &[f64],
    opts: &CheckOptions,
) -> ResidualReport {
    let mut points: Vec<SamplePoint> = freqs.iter().map(|e| SamplePoint::Frequency([e.re, e.im])).collect();
    let outcome = (|| {
        let dim = family.dim();
        let p = parity_superop(&family.parity_operator());
        let (dual, gamma) = opts.rhs_dual(family, theta);
        let mut freq_res: f64 = 0.0;
        for &e in freqs {
            let lhs = superadjoint(&family.kernel_hat(theta, e)?);
            let dual_k = family.kernel_hat(&dual, dual_frequency(e, gamma))?;
            let rhs = &shifted_identity(dim, c64(0.0, gamma)) - &conjugate_by(&p, &dual_k);
            freq_res = worst(freq_res, lhs.max_abs_diff(&rhs));
        }
        let mut time_res: Option<f64> = None;
        match family.kernel_delta(theta) {
            Err(Error::Missing(_)) => {}
            Err(e) => return Err(e),
            Ok(delta) => {
                let lhs = superadjoint(&delta);
                let rhs = &shifted_identity(dim, c64(0.0, gamma)) - &conjugate_by(&p, &family.kernel_delta(&dual)?);
                let mut r = lhs.max_abs_diff(&rhs);
                for &t in times {
                    let lhs = superadjoint(&family.kernel_smooth(theta, t)?);
                    let rhs = conjugate_by(&p, &family.kernel_smooth(&dual, t)?).scale(c64(-(-gamma * t).exp(), 0.0));
                    r = worst(r, lhs.max_abs_diff(&rhs));
                }
                time_res = Some(r);
            }
        }
        let total = worst(freq_res, time_res.unwrap_or(0.0));
        Ok((total, json!({ "frequency_residual": freq_res, "time_residual": time_res })))
    })();
    if family.kernel_delta(theta).is_ok() {
        points.extend(times.iter().map(|&t| SamplePoint::Time(t)));
    }
    finish("kernel_duality", theta, points, opts.tol, outcome)
}

/// `Π(t)⁻¹ G(t) Π(t)` after checking that `Π(t)` is well conditioned.
pub(crate) fn similarity_transformed_generator(family: &dyn SuperOpFamily, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
    let pi = family.propagator(theta, t)?;
    let condition = pi.condition_number();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let inv = pi.try_inverse()?;
    Ok(&(&inv * &family.generator(theta, t)?) * &pi)
}

/// `G^H(t) = [Π(t)⁻¹G(t)Π(t)]‡`.
pub fn heisenberg_generator(family: &dyn SuperOpFamily, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
    Ok(superadjoint(&similarity_transformed_generator(family, theta, t)?))
}

/// `[Π(t)⁻¹G(t)Π(t)]‡ = iΓ𝟙 − 𝒫 Ḡ(t) 𝒫`; for families offering the flipped
/// generator also `G(t)‡ = iΓ𝟙 + 𝒫 G(t)|_{g→−g} 𝒫`.
pub fn check_generator_duality(family: &dyn SuperOpFamily, theta: &ModelParams, times: &[f64], opts: &CheckOptions) -> ResidualReport {
    let points: Vec<SamplePoint> = times.iter().map(|&t| SamplePoint::Time(t)).collect();
    let outcome = (|| {
        let dim = family.dim();
        let p = parity_superop(&family.parity_operator());
        let (dual, gamma) = opts.rhs_dual(family, theta);
        let (_, gamma_same) = opts.rhs_same(family, theta);
        let mut main: f64 = 0.0;
        let mut flip: Option<f64> = None;
        for &t in times {
            let gh = heisenberg_generator(family, theta, t)?;
            let rhs = &shifted_identity(dim, c64(0.0, gamma)) - &conjugate_by(&p, &family.generator(&dual, t)?);
            main = worst(main, gh.max_abs_diff(&rhs));
            match family.generator_flipped(theta, t) {
                Err(Error::Missing(_)) => {}
                Err(e) => return Err(e),
                Ok(flipped) => {
                    let lhs = superadjoint(&family.generator(theta, t)?);
                    let rhs = &shifted_identity(dim, c64(0.0, gamma_same)) + &conjugate_by(&p, &flipped);
                    flip = Some(worst(flip.unwrap_or(0.0), lhs.max_abs_diff(&rhs)));
                }
            }
        }
        Ok((worst(main, flip.unwrap_or(0.0)), json!({ "similarity_residual": main, "g_flip_residual": flip })))
    })();
    finish("generator_duality", theta, points, opts.tol, outcome)
}

/// `choi[Π‡] = 𝕊 choi[Π]* 𝕊 = e^{−Γt} (P⊗P) choi[Π̄]`.
pub fn check_choi_duality(family: &dyn SuperOpFamily, theta: &ModelParams, t: f64, opts: &CheckOptions) -> ResidualReport {
    let outcome = (|| {
        let parity = family.parity_operator();
        let (dual, gamma) = opts.rhs_dual(family, theta);
        let pi = family.propagator(theta, t)?;
        let adjoint_choi = choi_of(&superadjoint(&pi));
        let swapped = choi_duality_transform(&choi_of(&pi));
        let dual_choi = choi_of(&family.propagator(&dual, t)?);
        let bipartite = parity.entries().kronecker(parity.entries());
        let rhs = dual_choi.left_multiply(&bipartite).scale(c64((-gamma * t).exp(), 0.0));
        let r1 = adjoint_choi.max_abs_diff(&swapped);
        let r2 = adjoint_choi.max_abs_diff(&rhs);
        let witness = json!({
            "swap_residual": r1,
            "dual_residual": r2,
            "dual_min_choi_eigenvalue": dual_choi.min_eigenvalue(),
        });
        Ok((worst(r1, r2), witness))
    })();
    finish("choi_duality", theta, vec![SamplePoint::Time(t)], opts.tol, outcome)
}

/// Which representation a spectral cross relation is checked on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossTarget {
    Propagator(f64),
    Generator(f64),
    KernelHat(Complex64),
}

impl CrossTarget {
    fn id(&self) -> &'static str {
        match self {
            Self::Propagator(_) => "spectral_cross_propagator",
            Self::Generator(_) => "spectral_cross_generator",
            Self::KernelHat(_) => "spectral_cross_kernel",
        }
    }

    fn point(&self) -> SamplePoint {
        match *self {
            Self::Propagator(t) | Self::Generator(t) => SamplePoint::Time(t),
            Self::KernelHat(e) => SamplePoint::Frequency([e.re, e.im]),
        }
    }
}

/// `‖a − c b‖ / ‖a‖` for the least-squares `c`, and that `c`.
fn proportionality(a: &OperatorMatrix, b: &OperatorMatrix) -> (f64, Complex64) {
    let bb = b.hs_inner(b).re;
    if bb == 0.0 {
        return (f64::INFINITY, c64(0.0, 0.0));
    }
    let c = b.hs_inner(a) / bb;
    let r = (a - &b.scale(c)).hs_norm() / a.hs_norm().max(f64::MIN_POSITIVE);
    (r, c)
}

/// Cross relations between the spectra at `θ` and `θ̄`.
///
/// With `X‡ = a𝟙 + b𝒫Y𝒫`, every eigenvalue `ȳ_i` of the dual object `Y`
/// maps to the eigenvalue `(a + bȳ_i)*` of `X`, with left vector `∝ 𝒫r̄_i`
/// and right vector `∝ 𝒫l̄_i`; the two proportionality constants multiply to
/// one. Pairs are found by nearest match; near ties are reported.
pub fn check_spectral_cross_relations(
    family: &dyn SuperOpFamily,
    theta: &ModelParams,
    target: CrossTarget,
    opts: &CheckOptions,
) -> ResidualReport {
    let outcome = (|| {
        let parity = family.parity_operator();
        let (dual, gamma) = opts.rhs_dual(family, theta);
        let (x, y, a, b) = match target {
            CrossTarget::Propagator(t) => {
                (family.propagator(theta, t)?, family.propagator(&dual, t)?, c64(0.0, 0.0), c64((-gamma * t).exp(), 0.0))
            }
            CrossTarget::Generator(t) => (
                similarity_transformed_generator(family, theta, t)?,
                family.generator(&dual, t)?,
                c64(0.0, gamma),
                c64(-1.0, 0.0),
            ),
            CrossTarget::KernelHat(e) => (
                family.kernel_hat(theta, e)?,
                family.kernel_hat(&dual, dual_frequency(e, gamma))?,
                c64(0.0, gamma),
                c64(-1.0, 0.0),
            ),
        };
        let dx = spectral_decompose(&x)?;
        let dy = spectral_decompose(&y)?;
        if !dx.is_nondegenerate() || !dy.is_nondegenerate() {
            return Err(Error::Ambiguous("degenerate spectrum; cross relations need distinct eigenvalues".into()));
        }
        let mut used = vec![false; dx.modes.len()];
        let mut pairs = Vec::new();
        let mut residual: f64 = 0.0;
        for (i, mode_y) in dy.modes.iter().enumerate() {
            let mapped = (a + b * mode_y.eigenvalue).conj();
            let mut dist: Vec<(f64, usize)> =
                dx.modes.iter().enumerate().map(|(j, m)| ((m.eigenvalue - mapped).norm(), j)).collect();
            dist.sort_by(|u, v| u.0.total_cmp(&v.0));
            let window = opts.tol * mapped.norm().max(1.0);
            if dist.len() > 1 && dist[1].0 <= window {
                return Err(Error::Ambiguous(format!("two eigenvalues within {window:.1e} of {mapped}")));
            }
            let (d, j) = dist[0];
            if used[j] {
                return Err(Error::Ambiguous(format!("eigenvalue {} paired twice", dx.modes[j].eigenvalue)));
            }
            used[j] = true;
            let mode_x = &dx.modes[j];
            let (rl, cl) = proportionality(&mode_x.left, &(&parity * &mode_y.right));
            let (rr, cr) = proportionality(&mode_x.right, &(&parity * &mode_y.left));
            let norm = (cl.conj() * cr - c64(1.0, 0.0)).norm();
            let pair_res = d.max(rl).max(rr).max(norm);
            residual = worst(residual, pair_res);
            pairs.push(json!({
                "dual_index": i,
                "index": j,
                "eigenvalue": [mode_x.eigenvalue.re, mode_x.eigenvalue.im],
                "eigenvalue_residual": d,
                "vector_residual": rl.max(rr),
                "normalization_residual": norm,
            }));
        }
        Ok((residual, json!({ "pairs": pairs })))
    })();
    finish(target.id(), theta, vec![target.point()], opts.tol, outcome)
}

/// Frequencies in the strip `0 < Im E < Γ` used by default.
pub fn default_frequencies(gamma: f64) -> Vec<Complex64> {
    let g = gamma.abs().max(f64::MIN_POSITIVE);
    [(0.0, 0.5), (0.3, 0.2), (-0.8, 0.7), (1.5, 0.5), (-2.5, 0.9)].iter().map(|&(re, im)| c64(re * g, im * g)).collect()
}
