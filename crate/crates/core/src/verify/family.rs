use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::functions::{ModelParams, QuadratureConfig};
use crate::liouville::operator::{matrix_to_rows, rows_to_matrix};
use crate::liouville::{lmul_rmul, OperatorMatrix, SuperOperator, BASIS_CONVENTION};
use crate::model::RlmProvider;
use crate::{c64, Error, Result, I};

/// A parametrized family of superoperators on which duality relations are
/// checked. Every callback is optional; checks needing a missing one report
/// [`Error::Missing`].
pub trait SuperOpFamily: Send + Sync {
    fn dim(&self) -> usize;

    /// Fermion parity operator `(−1)^N` on the system Hilbert space.
    fn parity_operator(&self) -> OperatorMatrix;

    /// Total coupling `Γ` entering the duality relations at `theta`.
    fn gamma_sum(&self, theta: &ModelParams) -> f64 {
        theta.gamma
    }

    fn dual_map(&self, theta: &ModelParams) -> ModelParams {
        theta.dual()
    }

    fn propagator(&self, _theta: &ModelParams, _t: f64) -> Result<SuperOperator> {
        Err(Error::Missing("propagator".into()))
    }

    fn generator(&self, _theta: &ModelParams, _t: f64) -> Result<SuperOperator> {
        Err(Error::Missing("generator".into()))
    }

    fn kernel_hat(&self, _theta: &ModelParams, _e: Complex64) -> Result<SuperOperator> {
        Err(Error::Missing("kernel_hat".into()))
    }

    /// `Π̂(E)`; defaults to the resolvent `i(E − K̂(E))⁻¹`.
    fn propagator_hat(&self, theta: &ModelParams, e: Complex64) -> Result<SuperOperator> {
        let k = self.kernel_hat(theta, e)?;
        let shifted = &SuperOperator::identity(self.dim()).scale(e) - &k;
        Ok(shifted.try_inverse()?.scale(I))
    }

    /// Coefficient of `δ(t)` in the time-domain memory kernel.
    fn kernel_delta(&self, _theta: &ModelParams) -> Result<SuperOperator> {
        Err(Error::Missing("kernel_delta".into()))
    }

    /// Smooth part of the time-domain memory kernel.
    fn kernel_smooth(&self, _theta: &ModelParams, _t: f64) -> Result<SuperOperator> {
        Err(Error::Missing("kernel_smooth".into()))
    }

    /// `lim_{t→∞} G(t)`, analytically continued where needed.
    fn stationary_generator(&self, _theta: &ModelParams) -> Result<SuperOperator> {
        Err(Error::Missing("stationary_generator".into()))
    }

    /// `G(t)` with `g(t) → −g(t)`; meaningful only for the resonant level.
    fn generator_flipped(&self, _theta: &ModelParams, _t: f64) -> Result<SuperOperator> {
        Err(Error::Missing("generator_flipped".into()))
    }
}

/// Parity superoperator `𝒫 = (−1)^N •`.
pub fn parity_superop(parity: &OperatorMatrix) -> SuperOperator {
    lmul_rmul(parity, &OperatorMatrix::identity(parity.dim())).expect("square parity operator")
}

/// `‖𝒬S𝒬 − S‖_max` with `𝒬 = (−1)^N • (−1)^N`; zero for parity-covariant maps.
pub fn parity_covariance_residual(s: &SuperOperator, parity: &OperatorMatrix) -> f64 {
    let q = lmul_rmul(parity, parity).expect("square parity operator");
    (&(&q * s) * &q).max_abs_diff(s)
}

/// The resonant level model as a [`SuperOpFamily`]; providers are cached
/// per parameter set so scalar memos are shared across checks.
#[derive(Debug, Default)]
pub struct RlmFamily {
    quad: QuadratureConfig,
    providers: Mutex<HashMap<[u64; 4], Arc<RlmProvider>>>,
}

impl RlmFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_quadrature(quad: QuadratureConfig) -> Self {
        Self { quad, providers: Mutex::new(HashMap::new()) }
    }

    pub fn provider(&self, theta: &ModelParams) -> Arc<RlmProvider> {
        self.providers
            .lock()
            .expect("provider cache lock")
            .entry(theta.key())
            .or_insert_with(|| Arc::new(RlmProvider::with_quadrature(*theta, self.quad)))
            .clone()
    }
}

impl SuperOpFamily for RlmFamily {
    fn dim(&self) -> usize {
        2
    }

    fn parity_operator(&self) -> OperatorMatrix {
        RlmProvider::parity()
    }

    fn propagator(&self, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
        self.provider(theta).propagator(t)
    }

    fn generator(&self, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
        self.provider(theta).generator(t)
    }

    fn kernel_hat(&self, theta: &ModelParams, e: Complex64) -> Result<SuperOperator> {
        self.provider(theta).memory_kernel_hat(e)
    }

    fn propagator_hat(&self, theta: &ModelParams, e: Complex64) -> Result<SuperOperator> {
        self.provider(theta).propagator_hat(e)
    }

    fn kernel_delta(&self, theta: &ModelParams) -> Result<SuperOperator> {
        Ok(self.provider(theta).kernel_delta())
    }

    fn kernel_smooth(&self, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
        Ok(self.provider(theta).kernel_smooth(t))
    }

    fn stationary_generator(&self, theta: &ModelParams) -> Result<SuperOperator> {
        self.provider(theta).stationary_generator()
    }

    fn generator_flipped(&self, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
        let rlm = self.provider(theta);
        Ok(rlm.generator_with_g(-rlm.g(t)?))
    }
}

// ---- external families ---------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Propagator,
    Generator,
    KernelHat,
    PropagatorHat,
    KernelDelta,
    KernelSmooth,
    StationaryGenerator,
}

/// Sample argument: a time, a complex frequency `[re, im]`, or nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleArg {
    Time(f64),
    Frequency([f64; 2]),
}

impl SampleArg {
    fn key(arg: Option<SampleArg>) -> [u64; 2] {
        match arg {
            None => [u64::MAX, u64::MAX],
            Some(SampleArg::Time(t)) => [t.to_bits(), u64::MAX - 1],
            Some(SampleArg::Frequency([re, im])) => [re.to_bits(), im.to_bits()],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilySample {
    pub kind: SampleKind,
    #[serde(default)]
    pub arg: Option<SampleArg>,
    pub theta: ModelParams,
    /// Row-major `[re, im]` entries of the superoperator.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// JSON form of an externally supplied family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyJson {
    pub dim: usize,
    pub gamma_sum: f64,
    pub parity_diag: Vec<f64>,
    #[serde(default = "default_convention")]
    pub basis_convention: String,
    /// Parameter sets to check; when empty, every physical `θ` among the
    /// samples is used.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub thetas: Vec<ModelParams>,
    pub samples: Vec<FamilySample>,
}

fn default_convention() -> String {
    BASIS_CONVENTION.to_string()
}

type SampleKey = (SampleKind, [u64; 4], [u64; 2]);

/// A family defined by tabulated samples; lookups are exact on `(kind, θ, arg)`.
#[derive(Debug, Clone)]
pub struct SampledFamily {
    dim: usize,
    gamma_sum: f64,
    parity: OperatorMatrix,
    thetas: Vec<ModelParams>,
    samples: HashMap<SampleKey, SuperOperator>,
}

impl SampledFamily {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Self::from_json(serde_json::from_str(text)?)
    }

    pub fn from_json(raw: FamilyJson) -> Result<Self> {
        if raw.basis_convention != BASIS_CONVENTION {
            return Err(Error::InvalidInput(format!("unsupported basis convention {}", raw.basis_convention)));
        }
        if raw.parity_diag.len() != raw.dim {
            return Err(Error::DimensionMismatch { expected: raw.dim, got: raw.parity_diag.len() });
        }
        if raw.parity_diag.iter().any(|&x| x != 1.0 && x != -1.0) {
            return Err(Error::InvalidInput("parity_diag entries must be ±1".into()));
        }
        let parity = OperatorMatrix::diagonal(&raw.parity_diag.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>());
        let mut samples = HashMap::with_capacity(raw.samples.len());
        let mut thetas = raw.thetas;
        let listed = !thetas.is_empty();
        for s in raw.samples {
            let m = SuperOperator::new(rows_to_matrix(&s.matrix)?)?;
            if m.dim() != raw.dim {
                return Err(Error::DimensionMismatch { expected: raw.dim, got: m.dim() });
            }
            let leak = parity_covariance_residual(&m, &parity);
            if leak > 1e-10 * m.max_abs().max(1.0) {
                return Err(Error::InvalidInput(format!("{:?} sample is not parity covariant (residual {leak:.3e})", s.kind)));
            }
            s.theta.validate()?;
            if !listed && s.theta.is_physical() && !thetas.iter().any(|t| t.key() == s.theta.key()) {
                thetas.push(s.theta);
            }
            samples.insert((s.kind, s.theta.key(), SampleArg::key(s.arg)), m);
        }
        Ok(Self { dim: raw.dim, gamma_sum: raw.gamma_sum, parity, thetas, samples })
    }

    /// Parameter sets the document asks to be checked.
    pub fn thetas(&self) -> &[ModelParams] {
        &self.thetas
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn lookup(&self, kind: SampleKind, theta: &ModelParams, arg: Option<SampleArg>) -> Result<SuperOperator> {
        self.samples.get(&(kind, theta.key(), SampleArg::key(arg))).cloned().ok_or_else(|| {
            Error::Missing(format!("no {kind:?} sample at θ = {theta:?}, argument {arg:?}"))
        })
    }
}

impl SuperOpFamily for SampledFamily {
    fn dim(&self) -> usize {
        self.dim
    }

    fn parity_operator(&self) -> OperatorMatrix {
        self.parity.clone()
    }

    /// The tabulated `Γ` for physical parameters, mirrored for dual ones.
    fn gamma_sum(&self, theta: &ModelParams) -> f64 {
        if theta.gamma < 0.0 {
            -self.gamma_sum.abs()
        } else {
            self.gamma_sum.abs()
        }
    }

    fn propagator(&self, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
        self.lookup(SampleKind::Propagator, theta, Some(SampleArg::Time(t)))
    }

    fn generator(&self, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
        self.lookup(SampleKind::Generator, theta, Some(SampleArg::Time(t)))
    }

    fn kernel_hat(&self, theta: &ModelParams, e: Complex64) -> Result<SuperOperator> {
        self.lookup(SampleKind::KernelHat, theta, Some(SampleArg::Frequency([e.re, e.im])))
    }

    fn propagator_hat(&self, theta: &ModelParams, e: Complex64) -> Result<SuperOperator> {
        match self.lookup(SampleKind::PropagatorHat, theta, Some(SampleArg::Frequency([e.re, e.im]))) {
            Err(Error::Missing(_)) => {
                let k = self.kernel_hat(theta, e)?;
                let shifted = &SuperOperator::identity(self.dim).scale(e) - &k;
                Ok(shifted.try_inverse()?.scale(I))
            }
            other => other,
        }
    }

    fn kernel_delta(&self, theta: &ModelParams) -> Result<SuperOperator> {
        self.lookup(SampleKind::KernelDelta, theta, None)
    }

    fn kernel_smooth(&self, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
        self.lookup(SampleKind::KernelSmooth, theta, Some(SampleArg::Time(t)))
    }

    fn stationary_generator(&self, theta: &ModelParams) -> Result<SuperOperator> {
        self.lookup(SampleKind::StationaryGenerator, theta, None)
    }
}

/// Wraps a family and records every successful evaluation, so the exact
/// sample set used by a check run can be exported.
pub struct RecordingFamily<'a> {
    inner: &'a dyn SuperOpFamily,
    log: Mutex<BTreeMap<(SampleKind, [u64; 4], [u64; 2]), FamilySample>>,
}

impl<'a> RecordingFamily<'a> {
    pub fn new(inner: &'a dyn SuperOpFamily) -> Self {
        Self { inner, log: Mutex::new(BTreeMap::new()) }
    }

    fn record(&self, kind: SampleKind, theta: &ModelParams, arg: Option<SampleArg>, r: Result<SuperOperator>) -> Result<SuperOperator> {
        if let Ok(m) = &r {
            let sample = FamilySample { kind, arg, theta: *theta, matrix: matrix_to_rows(m.entries()) };
            self.log.lock().expect("recording lock").insert((kind, theta.key(), SampleArg::key(arg)), sample);
        }
        r
    }

    /// The recorded samples as a family document listing `thetas`.
    /// `gamma_sum` is taken from the first of them.
    pub fn into_json(self, thetas: &[ModelParams]) -> FamilyJson {
        let reference = thetas.first().copied().unwrap_or(ModelParams { epsilon: 0.0, mu: 0.0, temperature: 1.0, gamma: 1.0 });
        let parity = self.inner.parity_operator();
        FamilyJson {
            dim: self.inner.dim(),
            gamma_sum: self.inner.gamma_sum(&reference).abs(),
            parity_diag: (0..parity.dim()).map(|i| parity.entries()[(i, i)].re).collect(),
            basis_convention: BASIS_CONVENTION.to_string(),
            thetas: thetas.to_vec(),
            samples: self.log.into_inner().expect("recording lock").into_values().collect(),
        }
    }
}

impl SuperOpFamily for RecordingFamily<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn parity_operator(&self) -> OperatorMatrix {
        self.inner.parity_operator()
    }

    fn gamma_sum(&self, theta: &ModelParams) -> f64 {
        self.inner.gamma_sum(theta)
    }

    fn dual_map(&self, theta: &ModelParams) -> ModelParams {
        self.inner.dual_map(theta)
    }

    fn propagator(&self, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
        self.record(SampleKind::Propagator, theta, Some(SampleArg::Time(t)), self.inner.propagator(theta, t))
    }

    fn generator(&self, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
        self.record(SampleKind::Generator, theta, Some(SampleArg::Time(t)), self.inner.generator(theta, t))
    }

    fn kernel_hat(&self, theta: &ModelParams, e: Complex64) -> Result<SuperOperator> {
        let arg = Some(SampleArg::Frequency([e.re, e.im]));
        self.record(SampleKind::KernelHat, theta, arg, self.inner.kernel_hat(theta, e))
    }

    fn propagator_hat(&self, theta: &ModelParams, e: Complex64) -> Result<SuperOperator> {
        let arg = Some(SampleArg::Frequency([e.re, e.im]));
        self.record(SampleKind::PropagatorHat, theta, arg, self.inner.propagator_hat(theta, e))
    }

    fn kernel_delta(&self, theta: &ModelParams) -> Result<SuperOperator> {
        self.record(SampleKind::KernelDelta, theta, None, self.inner.kernel_delta(theta))
    }

    fn kernel_smooth(&self, theta: &ModelParams, t: f64) -> Result<SuperOperator> {
        self.record(SampleKind::KernelSmooth, theta, Some(SampleArg::Time(t)), self.inner.kernel_smooth(theta, t))
    }

    fn stationary_generator(&self, theta: &ModelParams) -> Result<SuperOperator> {
        self.record(SampleKind::StationaryGenerator, theta, None, self.inner.stationary_generator(theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rlm_maps_are_parity_covariant() {
        let fam = RlmFamily::new();
        let th = ModelParams::new(0.5, 0.0, 0.25, 1.0).unwrap();
        let p = fam.parity_operator();
        for s in [
            fam.propagator(&th, 1.0).unwrap(),
            fam.generator(&th, 1.0).unwrap(),
            fam.kernel_hat(&th, c64(0.2, 0.5)).unwrap(),
        ] {
            assert!(parity_covariance_residual(&s, &p) < 1e-14);
        }
    }

    #[test]
    fn recorded_samples_round_trip_exactly() {
        let fam = RlmFamily::new();
        let th = ModelParams::new(0.5, 0.0, 0.25, 1.0).unwrap();
        let rec = RecordingFamily::new(&fam);
        let a = rec.propagator(&th, 0.7).unwrap();
        let b = rec.kernel_hat(&th.dual(), c64(0.1, 0.4)).unwrap();
        let text = serde_json::to_string(&rec.into_json(&[th])).unwrap();
        let sampled = SampledFamily::from_json_str(&text).unwrap();
        assert_eq!(sampled.len(), 2);
        assert_eq!(sampled.propagator(&th, 0.7).unwrap(), a);
        assert_eq!(sampled.kernel_hat(&th.dual(), c64(0.1, 0.4)).unwrap(), b);
        assert_eq!(sampled.gamma_sum(&th.dual()), -1.0);
        assert!(matches!(sampled.generator(&th, 0.7), Err(Error::Missing(_))));
    }

    #[test]
    fn non_covariant_sample_rejected() {
        let doc = serde_json::json!({
            "dim": 2, "gamma_sum": 1.0, "parity_diag": [1.0, -1.0],
            "samples": [{
                "kind": "propagator", "arg": 1.0,
                "theta": {"epsilon": 0.0, "mu": 0.0, "temperature": 1.0, "gamma": 1.0},
                "matrix": [
                    [[1.0, 0.0], [0.5, 0.0], [0.0, 0.0], [0.0, 0.0]],
                    [[0.0, 0.0], [1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                    [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0], [0.0, 0.0]],
                    [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
                ]
            }]
        });
        assert!(SampledFamily::from_json(serde_json::from_value(doc).unwrap()).is_err());
    }
}
