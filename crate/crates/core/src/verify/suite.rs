use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::family::{FamilyJson, RecordingFamily, SuperOpFamily};
use super::fixed_point::{check_fixed_point_stationary, check_functional_fixed_point, Picture};
use super::kraus_jump::{check_jump_duality, check_kraus_duality, check_kraus_sum_rules_family};
use super::relations::{
    check_choi_duality, check_generator_duality, check_kernel_duality, check_propagator_duality,
    check_spectral_cross_relations, default_frequencies, CheckOptions, CrossTarget,
};
use super::report::ResidualReport;
use crate::functions::ModelParams;
use crate::c64;

/// Per-relation tolerances of the default suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteTolerances {
    /// Closed form against closed form.
    pub closed_form: f64,
    /// Relations that invert `Π(t)` or match decompositions.
    pub inverted: f64,
    /// Relations that need an extra quadrature.
    pub quadrature: f64,
    /// Discretized functional fixed point at the finer step.
    pub functional: f64,
}

impl Default for SuiteTolerances {
    fn default() -> Self {
        Self { closed_form: 1e-8, inverted: 1e-7, quadrature: 1e-6, functional: 1e-4 }
    }
}

/// Sample grid of the default suite. Times are in units of `1/Γ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub thetas: Vec<ModelParams>,
    pub times: Vec<f64>,
    pub functional_time: f64,
    pub functional_steps: usize,
    pub tolerances: SuiteTolerances,
    pub rhs_gamma_factor: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            thetas: default_thetas(),
            times: vec![0.1, 0.5, 1.0, 3.0],
            functional_time: 2.0,
            functional_steps: 400,
            tolerances: SuiteTolerances::default(),
            rhs_gamma_factor: 1.0,
        }
    }
}

/// Five parameter sets at `Γ = 1`, `μ = 0`, all with `πT > Γ/2` so that the
/// stationary integral converges by direct quadrature.
pub fn default_thetas() -> Vec<ModelParams> {
    [(0.5, 0.25), (1.0, 0.5), (0.2, 1.0), (1.5, 0.2), (-0.7, 0.3)]
        .iter()
        .map(|&(eps, temp)| ModelParams { epsilon: eps, mu: 0.0, temperature: temp, gamma: 1.0 })
        .collect()
}

#[derive(Debug, Clone, Copy)]
enum Task {
    PropagatorTime(usize, f64),
    PropagatorFrequency(usize),
    Kernel(usize),
    Generator(usize, f64),
    Choi(usize, f64),
    KrausDuality(usize, f64),
    KrausSumRules(usize, f64),
    Jump(usize, f64),
    CrossPropagator(usize, f64),
    CrossGenerator(usize, f64),
    CrossKernel(usize),
    Stationary(usize),
    Functional(usize, Picture),
}

impl Task {
    fn theta_index(&self) -> usize {
        match *self {
            Self::PropagatorTime(i, _)
            | Self::PropagatorFrequency(i)
            | Self::Kernel(i)
            | Self::Generator(i, _)
            | Self::Choi(i, _)
            | Self::KrausDuality(i, _)
            | Self::KrausSumRules(i, _)
            | Self::Jump(i, _)
            | Self::CrossPropagator(i, _)
            | Self::CrossGenerator(i, _)
            | Self::CrossKernel(i)
            | Self::Stationary(i)
            | Self::Functional(i, _) => i,
        }
    }
}

fn tasks(cfg: &SuiteConfig) -> Vec<Task> {
    let mut out = Vec::new();
    for i in 0..cfg.thetas.len() {
        for &t in &cfg.times {
            out.extend([
                Task::PropagatorTime(i, t),
                Task::Generator(i, t),
                Task::Choi(i, t),
                Task::KrausDuality(i, t),
                Task::KrausSumRules(i, t),
                Task::Jump(i, t),
                Task::CrossPropagator(i, t),
                Task::CrossGenerator(i, t),
            ]);
        }
        out.extend([
            Task::PropagatorFrequency(i),
            Task::Kernel(i),
            Task::CrossKernel(i),
            Task::Stationary(i),
            Task::Functional(i, Picture::Schroedinger),
            Task::Functional(i, Picture::Heisenberg),
        ]);
    }
    out
}

fn run_task(family: &dyn SuperOpFamily, cfg: &SuiteConfig, task: Task) -> ResidualReport {
    let theta = &cfg.thetas[task.theta_index()];
    let tol = &cfg.tolerances;
    let scale = 1.0 / family.gamma_sum(theta).abs().max(f64::MIN_POSITIVE);
    let opts = |t: f64| CheckOptions::new(t).with_rhs_gamma_factor(cfg.rhs_gamma_factor);
    let times: Vec<f64> = cfg.times.iter().map(|t| t * scale).collect();
    let freqs = default_frequencies(family.gamma_sum(theta));
    match task {
        Task::PropagatorTime(_, t) => check_propagator_duality(family, theta, &[t * scale], &[], &opts(tol.closed_form)),
        Task::PropagatorFrequency(_) => check_propagator_duality(family, theta, &[], &freqs, &opts(tol.closed_form)),
        Task::Kernel(_) => check_kernel_duality(family, theta, &freqs, &times, &opts(tol.closed_form)),
        Task::Generator(_, t) => check_generator_duality(family, theta, &[t * scale], &opts(tol.inverted)),
        Task::Choi(_, t) => check_choi_duality(family, theta, t * scale, &opts(tol.closed_form)),
        Task::KrausDuality(_, t) => check_kraus_duality(family, theta, t * scale, &opts(tol.inverted)),
        Task::KrausSumRules(_, t) => check_kraus_sum_rules_family(family, theta, t * scale, &opts(tol.closed_form)),
        Task::Jump(_, t) => check_jump_duality(family, theta, t * scale, &opts(tol.inverted)),
        Task::CrossPropagator(_, t) => {
            check_spectral_cross_relations(family, theta, CrossTarget::Propagator(t * scale), &opts(tol.closed_form))
        }
        Task::CrossGenerator(_, t) => {
            check_spectral_cross_relations(family, theta, CrossTarget::Generator(t * scale), &opts(tol.inverted))
        }
        Task::CrossKernel(_) => {
            let e = c64(0.0, family.gamma_sum(theta));
            check_spectral_cross_relations(family, theta, CrossTarget::KernelHat(e), &opts(tol.closed_form))
        }
        Task::Stationary(_) => check_fixed_point_stationary(family, theta, &opts(tol.quadrature)),
        Task::Functional(_, picture) => check_functional_fixed_point(
            family,
            theta,
            cfg.functional_time * scale,
            cfg.functional_steps,
            picture,
            &opts(tol.functional),
        ),
    }
}

/// Runs every relation over the configured grid in parallel. Reports are
/// ordered by relation id, then by parameter set and sample order.
pub fn run_suite(family: &dyn SuperOpFamily, cfg: &SuiteConfig) -> Vec<ResidualReport> {
    let tasks = tasks(cfg);
    let mut reports: Vec<(usize, ResidualReport)> =
        tasks.par_iter().map(|&task| (task.theta_index(), run_task(family, cfg, task))).collect();
    reports.sort_by(|a, b| a.1.relation_id.cmp(&b.1.relation_id).then(a.0.cmp(&b.0)));
    reports.into_iter().map(|(_, r)| r).collect()
}

/// Runs the suite against `family` and returns every sample it needed as a
/// family document; replaying the document reproduces the reports.
pub fn export_family(family: &dyn SuperOpFamily, cfg: &SuiteConfig) -> FamilyJson {
    let recorder = RecordingFamily::new(family);
    let _ = run_suite(&recorder, cfg);
    recorder.into_json(&cfg.thetas)
}
