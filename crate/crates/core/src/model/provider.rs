use std::collections::HashMap;
use std::sync::Mutex;

use num_complex::Complex64;

use crate::functions::{g_of_t, k_of_t, p_of_t, stationary_g, ModelParams, QuadratureConfig};
use crate::liouville::{
    commutator_superop, dissipator, lmul_rmul, JumpSet, JumpTerm, KrausSet, KrausTerm, Mode, OperatorMatrix, Parity,
    SpectralDecomposition, SuperOperator,
};
use crate::{c64, Error, Result, I};

const DIM: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Scalar {
    G,
    GDual,
    P,
}

/// Resonant level model at fixed parameters.
///
/// Scalar functions are memoized per time point; the memo is only an
/// accelerator, every value is a pure function of `(params, t)`.
#[derive(Debug)]
pub struct RlmProvider {
    params: ModelParams,
    quad: QuadratureConfig,
    memo: Mutex<HashMap<(Scalar, u64), f64>>,
}

impl Clone for RlmProvider {
    fn clone(&self) -> Self {
        Self::with_quadrature(self.params, self.quad)
    }
}

impl RlmProvider {
    pub fn new(params: ModelParams) -> Self {
        Self::with_quadrature(params, QuadratureConfig::default())
    }

    pub fn with_quadrature(params: ModelParams, quad: QuadratureConfig) -> Self {
        Self { params, quad, memo: Mutex::new(HashMap::new()) }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    /// Provider at the dual parameters.
    pub fn dual(&self) -> Self {
        Self::with_quadrature(self.params.dual(), self.quad)
    }

    pub fn dim(&self) -> usize {
        DIM
    }

    // ---- operators -------------------------------------------------------

    pub fn annihilator() -> OperatorMatrix {
        OperatorMatrix::basis(DIM, 0, 1)
    }

    /// `d_η`: `d†` for `η = +1`, `d` for `η = −1`.
    pub fn d_eta(eta: f64) -> OperatorMatrix {
        if eta > 0.0 {
            Self::annihilator().dagger()
        } else {
            Self::annihilator()
        }
    }

    pub fn number() -> OperatorMatrix {
        OperatorMatrix::diagonal(&[c64(0.0, 0.0), c64(1.0, 0.0)])
    }

    pub fn parity() -> OperatorMatrix {
        OperatorMatrix::diagonal(&[c64(1.0, 0.0), c64(-1.0, 0.0)])
    }

    /// Parity superoperator `P = (−1)^N •`.
    pub fn parity_superop() -> SuperOperator {
        lmul_rmul(&Self::parity(), &OperatorMatrix::identity(DIM)).expect("same dimension")
    }

    pub fn hamiltonian(&self) -> OperatorMatrix {
        Self::number().scale(c64(self.params.epsilon, 0.0))
    }

    /// `D_η = d_η • d_η† − ½{d_η† d_η, •}`.
    pub fn dissipator_eta(eta: f64) -> SuperOperator {
        dissipator(&Self::d_eta(eta))
    }

    fn commutator(&self) -> SuperOperator {
        commutator_superop(&self.hamiltonian())
    }

    // ---- scalar functions ----------------------------------------------

    fn memoized(&self, which: Scalar, t: f64, f: impl FnOnce() -> Result<f64>) -> Result<f64> {
        let key = (which, t.to_bits());
        if let Some(v) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(*v);
        }
        let v = f()?;
        self.memo.lock().expect("memo lock").insert(key, v);
        Ok(v)
    }

    pub fn k(&self, t: f64) -> f64 {
        k_of_t(t, &self.params)
    }

    pub fn g(&self, t: f64) -> Result<f64> {
        self.memoized(Scalar::G, t, || g_of_t(t, &self.params, &self.quad))
    }

    /// `ḡ(t)`, integrated directly at dual parameters.
    pub fn g_dual(&self, t: f64) -> Result<f64> {
        self.memoized(Scalar::GDual, t, || g_of_t(t, &self.params.dual(), &self.quad))
    }

    pub fn p(&self, t: f64) -> Result<f64> {
        self.memoized(Scalar::P, t, || p_of_t(t, &self.params, &self.quad))
    }

    /// `g(∞) = k̂(iΓ/2)`.
    pub fn g_stationary(&self) -> Result<f64> {
        stationary_g(&self.params)
    }

    // ---- time domain -----------------------------------------------------

    /// `exp(−i[H,•]t + (Γt/2) Σ_η [1 − η p(t)] D_η)`.
    pub fn propagator(&self, t: f64) -> Result<SuperOperator> {
        check_time(t)?;
        let p = self.p(t)?;
        let gamma = self.params.gamma;
        let mut exponent = self.commutator().scale(-I * t);
        for eta in [1.0, -1.0] {
            exponent = &exponent + &Self::dissipator_eta(eta).scale(c64(0.5 * gamma * t * (1.0 - eta * p), 0.0));
        }
        Ok(exponent.exp())
    }

    /// Closed-form spectral data of `Π(t)`.
    pub fn propagator_spectral(&self, t: f64) -> Result<SpectralDecomposition> {
        check_time(t)?;
        let p = self.p(t)?;
        let gamma = self.params.gamma;
        let eps = self.params.epsilon;
        let values = [
            c64(1.0, 0.0),
            (c64(-0.5 * gamma, eps) * t).exp(),
            (c64(-0.5 * gamma, -eps) * t).exp(),
            c64((-gamma * t).exp(), 0.0),
        ];
        Ok(SpectralDecomposition::from_modes(table_modes(values, p)))
    }

    /// `−iG(t) = −i[H,•] + (Γ/2) Σ_η [1 − η g(t)] D_η`.
    pub fn generator(&self, t: f64) -> Result<SuperOperator> {
        check_time(t)?;
        Ok(self.generator_with_g(self.g(t)?))
    }

    /// The generator with an arbitrary value substituted for `g`.
    pub fn generator_with_g(&self, g: f64) -> SuperOperator {
        let gamma = self.params.gamma;
        let mut gen = self.commutator();
        for eta in [1.0, -1.0] {
            gen = &gen + &Self::dissipator_eta(eta).scale(I * (0.5 * gamma * (1.0 - eta * g)));
        }
        gen
    }

    pub fn generator_spectral(&self, t: f64) -> Result<SpectralDecomposition> {
        check_time(t)?;
        Ok(self.generator_spectral_with_g(self.g(t)?))
    }

    fn generator_spectral_with_g(&self, g: f64) -> SpectralDecomposition {
        let gamma = self.params.gamma;
        let eps = self.params.epsilon;
        let values = [c64(0.0, 0.0), c64(-eps, -0.5 * gamma), c64(eps, -0.5 * gamma), c64(0.0, -gamma)];
        SpectralDecomposition::from_modes(table_modes(values, g))
    }

    /// `G(∞)`, built from the analytically continued `g(∞) = k̂(iΓ/2)`.
    pub fn stationary_generator(&self) -> Result<SuperOperator> {
        Ok(self.generator_with_g(self.g_stationary()?))
    }

    pub fn stationary_generator_spectral(&self) -> Result<SpectralDecomposition> {
        Ok(self.generator_spectral_with_g(self.g_stationary()?))
    }

    /// Closed-form Kraus decomposition of `Π(t)`, ordered
    /// `(0,+), (0,−), (1,+), (1,−)`.
    pub fn kraus_set(&self, t: f64) -> Result<KrausSet> {
        check_time(t)?;
        let p = self.p(t)?;
        let gamma = self.params.gamma;
        let eps = self.params.epsilon;
        let sh = (0.5 * gamma * t).sinh();
        let ch = (0.5 * gamma * t).cosh();
        let root = (1.0 + p * p * sh * sh).sqrt();
        let decay = (-0.5 * gamma * t).exp();
        let upsilon = |eta: f64| 0.5 + 0.5 * eta * p * sh / root;
        let empty = &Self::annihilator() * &Self::annihilator().dagger();
        let full = Self::number();
        let mut terms = Vec::with_capacity(4);
        for eta in [1.0, -1.0] {
            let a = c64(0.0, 0.5 * eps * t).exp() * (eta * upsilon(eta).sqrt());
            let b = c64(0.0, -0.5 * eps * t).exp() * upsilon(-eta).sqrt();
            let operator = &empty.scale(a) + &full.scale(b);
            terms.push(KrausTerm { coefficient: decay * (ch + eta * root), operator, parity: Parity::Even });
        }
        for eta in [1.0, -1.0] {
            terms.push(KrausTerm {
                coefficient: 0.5 * (-(-gamma * t).exp_m1()) * (1.0 - eta * p),
                operator: Self::d_eta(eta),
                parity: Parity::Odd,
            });
        }
        Ok(KrausSet { terms })
    }

    /// Closed-form jump expansion: `H = εd†d`, `J_η = d_η`,
    /// `j_η = (Γ/2)[1 − η g(t)]`.
    pub fn jump_set(&self, t: f64) -> Result<JumpSet> {
        check_time(t)?;
        let g = self.g(t)?;
        let gamma = self.params.gamma;
        let terms = [1.0, -1.0]
            .iter()
            .map(|&eta| JumpTerm { rate: 0.5 * gamma * (1.0 - eta * g), operator: Self::d_eta(eta), parity: Parity::Odd })
            .collect();
        Ok(JumpSet { effective_hamiltonian: self.hamiltonian(), terms })
    }

    /// `(j_+^H, j_−^H)` with `j_η^H = (Γ/2)[1 − η ḡ(t)]`.
    pub fn heisenberg_jump_rates(&self, t: f64) -> Result<(f64, f64)> {
        check_time(t)?;
        let gd = self.g_dual(t)?;
        let gamma = self.params.gamma;
        Ok((0.5 * gamma * (1.0 - gd), 0.5 * gamma * (1.0 + gd)))
    }

    // ---- memory kernel in time ------------------------------------------

    /// Coefficient of `δ(t)` in `K(t)`.
    pub fn kernel_delta(&self) -> SuperOperator {
        self.generator_with_g(0.0)
    }

    /// Smooth part `−i(Γ/2) e^{−Γt/2} k(t) Σ_η η D_η` of `K(t)`.
    pub fn kernel_smooth(&self, t: f64) -> SuperOperator {
        let gamma = self.params.gamma;
        let weight = 0.5 * gamma * (-0.5 * gamma * t).exp() * self.k(t);
        (&Self::dissipator_eta(1.0) - &Self::dissipator_eta(-1.0)).scale(-I * weight)
    }

    // ---- observables -----------------------------------------------------

    /// `Tr N Π(t) ρ₀`.
    pub fn occupation(&self, t: f64, rho0: &OperatorMatrix) -> Result<f64> {
        check_state(rho0)?;
        let rho = self.propagator(t)?.apply(rho0);
        Ok((&Self::number() * &rho).trace().re)
    }

    /// `d⟨N⟩/dt = Γ e^{−Γt} ½[ḡ(t) + ⟨(−1)^N⟩_{ρ₀}]`.
    pub fn current(&self, t: f64, rho0: &OperatorMatrix) -> Result<f64> {
        check_state(rho0)?;
        check_time(t)?;
        let parity = (&Self::parity() * rho0).trace().re;
        let gamma = self.params.gamma;
        Ok(gamma * (-gamma * t).exp() * 0.5 * (self.g_dual(t)? + parity))
    }

    /// `Tr N (−iG(t)) Π(t) ρ₀`, the current from the time-local generator.
    pub fn current_from_generator(&self, t: f64, rho0: &OperatorMatrix) -> Result<f64> {
        check_state(rho0)?;
        let rho = self.propagator(t)?.apply(rho0);
        let drho = self.generator(t)?.scale(-I).apply(&rho);
        Ok((&Self::number() * &drho).trace().re)
    }
}

/// The four modes of the spectral tables, parametrized by the function `f`
/// (`p` for the propagator, `g` for the generator). `values` follow the
/// order: fixed point / zero mode, `η = +`, `η = −`, parity mode.
fn table_modes(values: [Complex64; 4], f: f64) -> Vec<Mode> {
    let one = OperatorMatrix::identity(DIM);
    let parity = RlmProvider::parity();
    let half = c64(0.5, 0.0);
    let d_plus_dag = RlmProvider::d_eta(1.0).dagger();
    let d_minus_dag = RlmProvider::d_eta(-1.0).dagger();
    vec![
        Mode {
            eigenvalue: values[0],
            right: (&one + &parity.scale(c64(f, 0.0))).scale(half),
            left: one.clone(),
        },
        Mode { eigenvalue: values[1], right: d_plus_dag.clone(), left: d_plus_dag },
        Mode { eigenvalue: values[2], right: d_minus_dag.clone(), left: d_minus_dag },
        Mode {
            eigenvalue: values[3],
            right: parity.clone(),
            left: (&parity - &one.scale(c64(f, 0.0))).scale(half),
        },
    ]
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidInput(format!("time must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

pub(crate) fn check_state(rho: &OperatorMatrix) -> Result<()> {
    if rho.dim() != DIM {
        return Err(Error::DimensionMismatch { expected: DIM, got: rho.dim() });
    }
    if !rho.is_hermitian(1e-10) {
        return Err(Error::InvalidInput("initial state is not Hermitian".into()));
    }
    let tr = rho.trace();
    if (tr - c64(1.0, 0.0)).norm() > 1e-10 {
        return Err(Error::InvalidInput(format!("initial state has trace {tr}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouville::{is_cp, is_tp, outer, spectral_decompose, superadjoint};

    fn provider() -> RlmProvider {
        RlmProvider::new(ModelParams::new(0.8, 0.3, 0.25, 1.0).unwrap())
    }

    #[test]
    fn propagator_basics() {
        let rlm = provider();
        let one = SuperOperator::identity(2);
        assert!(rlm.propagator(0.0).unwrap().max_abs_diff(&one) < 1e-15);
        let pi = rlm.propagator(1.3).unwrap();
        assert!(is_tp(&pi, 1e-12));
        assert!(is_cp(&pi, 1e-9).0);
        let out = pi.apply(&RlmProvider::parity());
        assert!(out.max_abs_diff(&RlmProvider::parity().scale(c64((-1.3f64).exp(), 0.0))) < 1e-13);
    }

    #[test]
    fn closed_form_spectrum_reconstructs_propagator() {
        let rlm = provider();
        for &t in &[0.3, 1.0, 4.0] {
            let pi = rlm.propagator(t).unwrap();
            let sd = rlm.propagator_spectral(t).unwrap();
            assert!(sd.reconstruct().max_abs_diff(&pi) < 1e-12, "t = {t}");
            assert!(sd.binormalization_error() < 1e-14);
            let num = spectral_decompose(&pi).unwrap();
            for (a, b) in num.modes.iter().zip(sd.modes.iter()) {
                assert!((a.eigenvalue - b.eigenvalue).norm() < 1e-12);
                assert!(a.projector().max_abs_diff(&b.projector()) < 1e-9);
            }
        }
    }

    #[test]
    fn generator_spectrum_and_parity_mode() {
        let rlm = provider();
        let g = rlm.generator(2.0).unwrap();
        assert!(rlm.generator_spectral(2.0).unwrap().reconstruct().max_abs_diff(&g) < 1e-13);
        let out = g.apply(&RlmProvider::parity());
        assert!(out.max_abs_diff(&RlmProvider::parity().scale(c64(0.0, -1.0))) < 1e-14);
    }

    #[test]
    fn kraus_closed_form_reconstructs() {
        let rlm = provider();
        let k0 = rlm.kraus_set(0.0).unwrap();
        assert!((k0.terms[0].coefficient - 2.0).abs() < 1e-15);
        for t in &k0.terms[1..] {
            assert!(t.coefficient.abs() < 1e-15);
        }
        for &t in &[0.1, 1.0, 5.0] {
            let k = rlm.kraus_set(t).unwrap();
            assert!(k.reconstruct(2).max_abs_diff(&rlm.propagator(t).unwrap()) < 1e-12);
            assert!(k.orthonormality_error() < 1e-14);
            assert!((k.coefficient_sum() - 2.0).abs() < 1e-13);
            assert!((k.signed_coefficient_sum() - 2.0 * (-t).exp()).abs() < 1e-13);
        }
    }

    #[test]
    fn dissipator_parity_identity() {
        let p = RlmProvider::parity_superop();
        for eta in [1.0, -1.0] {
            let lhs = &(&p * &superadjoint(&RlmProvider::dissipator_eta(eta))) * &p;
            let rhs = &RlmProvider::dissipator_eta(-eta).scale(c64(-1.0, 0.0)) - &SuperOperator::identity(2);
            assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        }
        assert!((&p * &p).max_abs_diff(&SuperOperator::identity(2)) == 0.0);
        let _ = outer(&RlmProvider::parity(), &RlmProvider::parity());
    }

    #[test]
    fn jump_rates_sum_to_gamma() {
        let rlm = provider();
        let js = rlm.jump_set(0.7).unwrap();
        assert!((js.rate_sum() - 1.0).abs() < 1e-15);
        assert!(js.generator().max_abs_diff(&rlm.generator(0.7).unwrap()) < 1e-14);
    }

    #[test]
    fn invalid_state_rejected() {
        let rlm = provider();
        let bad = OperatorMatrix::identity(2);
        assert!(rlm.occupation(1.0, &bad).is_err());
    }
}
