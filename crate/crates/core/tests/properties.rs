//! Randomized invariants over the physical parameter space.

use fermion_duality::functions::{digamma, g_dual_of_t, g_of_t, k_of_t, p_of_t, ModelParams, QuadratureConfig};
use fermion_duality::liouville::{choi_of, is_tp, superadjoint};
use fermion_duality::markov::{ring_error, semigroup_propagator, slip_operator, slip_propagator, Approximation};
use fermion_duality::model::RlmProvider;
use fermion_duality::verify::{
    check_generator_duality, check_kraus_duality, check_propagator_duality, parity_covariance_residual, CheckOptions,
    RlmFamily,
};
use fermion_duality::c64;
use proptest::prelude::*;

fn physical() -> impl Strategy<Value = ModelParams> {
    (-3.0..3.0f64, -1.0..1.0f64, 0.05..3.0f64, 0.2..3.0f64)
        .prop_map(|(eps, mu, temp, gamma)| ModelParams::new(eps, mu, temp, gamma).unwrap())
}

/// Parameters where the stationary integrals converge on both sides.
fn convergent() -> impl Strategy<Value = ModelParams> {
    (-2.0..2.0f64, 0.2..1.5f64).prop_map(|(eps, temp)| ModelParams::new(eps, 0.0, temp, 1.0).unwrap())
}

fn time() -> impl Strategy<Value = f64> {
    0.01..8.0f64
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn dual_map_is_an_involution(th in physical()) {
        prop_assert_eq!(th.dual().dual(), th);
    }

    #[test]
    fn memory_function_is_odd_under_duality(th in physical(), t in time()) {
        prop_assert_eq!(k_of_t(t, &th.dual()), -k_of_t(t, &th));
    }

    #[test]
    fn p_is_odd_under_duality_and_bounded(th in physical(), t in time()) {
        let q = QuadratureConfig::default();
        let p = p_of_t(t, &th, &q).unwrap();
        prop_assert!(p.abs() <= 1.0 + 1e-9);
        prop_assert!((p_of_t(t, &th.dual(), &q).unwrap() + p).abs() < 1e-12);
    }

    #[test]
    fn dual_g_identity(th in physical(), t in 0.01..4.0f64) {
        let q = QuadratureConfig::default();
        let gamma = th.gamma;
        let g = g_of_t(t, &th, &q).unwrap();
        let p = p_of_t(t, &th, &q).unwrap();
        let expected = (gamma * t).exp() * (-g + (1.0 - (-gamma * t).exp()) * p);
        let scale = 1.0f64.max(expected.abs());
        prop_assert!((g_dual_of_t(t, &th, &q).unwrap() - expected).abs() < 1e-8 * scale);
    }

    #[test]
    fn digamma_recurrence(re in -8.0..8.0f64, im in 0.1..8.0f64) {
        let z = c64(re, im);
        let lhs = digamma(z + 1.0).unwrap() - digamma(z).unwrap();
        prop_assert!((lhs - z.inv()).norm() < 1e-11 * (1.0 + z.inv().norm()));
    }

    #[test]
    fn propagator_is_tp_parity_covariant_and_cp(th in physical(), t in time()) {
        let r = RlmProvider::new(th);
        let pi = r.propagator(t).unwrap();
        prop_assert!(is_tp(&pi, 1e-12));
        prop_assert!(parity_covariance_residual(&pi, &RlmProvider::parity()) < 1e-12);
        prop_assert!(choi_of(&pi).min_eigenvalue() >= -1e-9);
        let decayed = pi.apply(&RlmProvider::parity());
        prop_assert!(decayed.max_abs_diff(&RlmProvider::parity().scale(c64((-th.gamma * t).exp(), 0.0))) < 1e-12);
    }

    #[test]
    fn propagator_duality_holds(th in physical(), t in time()) {
        let fam = RlmFamily::new();
        let r = check_propagator_duality(&fam, &th, &[t], &[], &CheckOptions::new(1e-8));
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn generator_duality_holds(th in physical(), t in 0.05..6.0f64) {
        let fam = RlmFamily::new();
        let r = check_generator_duality(&fam, &th, &[t], &CheckOptions::new(1e-7));
        prop_assert!(r.pass, "{:?}", r);
    }

    #[test]
    fn kraus_sum_rules_and_duality(th in physical(), t in time()) {
        let r = RlmProvider::new(th);
        let kraus = r.kraus_set(t).unwrap();
        prop_assert!(kraus.terms.iter().all(|k| k.coefficient >= -1e-10));
        prop_assert!((kraus.coefficient_sum() - 2.0).abs() < 1e-10);
        prop_assert!((kraus.signed_coefficient_sum() - 2.0 * (-th.gamma * t).exp()).abs() < 1e-10);
        let report = check_kraus_duality(&RlmFamily::new(), &th, t, &CheckOptions::new(1e-7));
        prop_assert!(report.pass, "{:?}", report);
    }

    #[test]
    fn jump_rates_sum_to_gamma(th in physical(), t in time()) {
        let r = RlmProvider::new(th);
        let jumps = r.jump_set(t).unwrap();
        prop_assert!((jumps.rate_sum() - th.gamma).abs() < 1e-12);
        prop_assert!(jumps.sum_rule_residual(th.gamma) < 1e-12);
        prop_assert!(jumps.generator().max_abs_diff(&r.generator(t).unwrap()) < 1e-12);
    }

    #[test]
    fn slip_is_tp_and_self_dual(th in convergent()) {
        let r = RlmProvider::new(th);
        let s = slip_operator(&r).unwrap().matrix;
        prop_assert!(is_tp(&s, 1e-9));
        let dual = slip_operator(&r.dual()).unwrap().matrix;
        let p = RlmProvider::parity_superop();
        prop_assert!(superadjoint(&s).max_abs_diff(&(&(&p * &dual) * &p)) < 1e-8);
    }

    #[test]
    fn approximate_propagators_are_tp(th in convergent(), t in time()) {
        let r = RlmProvider::new(th);
        let s = slip_operator(&r).unwrap();
        prop_assert!(is_tp(&semigroup_propagator(&r, t).unwrap(), 1e-9));
        prop_assert!(is_tp(&slip_propagator(&r, &s, t).unwrap(), 1e-9));
    }

    #[test]
    fn semigroup_is_cp_when_rates_are_positive(th in convergent(), t in time()) {
        // Stationary rates (Γ/2)(1 ∓ g(∞)) are nonnegative for all physical parameters.
        let r = RlmProvider::new(th);
        prop_assert!(r.g_stationary().unwrap().abs() <= 1.0);
        prop_assert!(choi_of(&semigroup_propagator(&r, t).unwrap()).min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn slip_propagator_reaches_the_exact_stationary_limit(th in convergent()) {
        let r = RlmProvider::new(th);
        let s = slip_operator(&r).unwrap();
        let t = 80.0;
        prop_assert!(slip_propagator(&r, &s, t).unwrap().max_abs_diff(&r.propagator(t).unwrap()) < 1e-8);
    }
}

#[test]
fn slip_breaks_the_semigroup_property() {
    let r = RlmProvider::new(ModelParams::new(0.5, 0.0, 0.25, 1.0).unwrap());
    let s = slip_operator(&r).unwrap();
    let a = slip_propagator(&r, &s, 0.7).unwrap();
    let b = slip_propagator(&r, &s, 1.3).unwrap();
    let ab = slip_propagator(&r, &s, 2.0).unwrap();
    assert!((&a * &b).max_abs_diff(&ab) > 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, ..ProptestConfig::default() })]

    /// The slip removes the decay pole at −iΓ and stays finite at the others.
    #[test]
    fn slip_cancels_isolated_poles(th in convergent()) {
        let r = RlmProvider::new(th);
        let s = slip_operator(&r).unwrap();
        let gamma = th.gamma;
        let detuning = th.epsilon - th.mu;
        let radius = 0.05 * gamma;
        let decay = c64(0.0, -gamma);
        let semi = ring_error(&r, Approximation::Semigroup, &s, decay, radius).unwrap();
        let slip = ring_error(&r, Approximation::Slip, &s, decay, radius).unwrap();
        prop_assert!(slip < semi, "slip {slip} vs semigroup {semi}");
        prop_assert!(slip < 10.0, "slip {slip}");
        for center in [c64(0.0, 0.0), c64(detuning, -0.5 * gamma), c64(-detuning, -0.5 * gamma)] {
            let near = ring_error(&r, Approximation::Slip, &s, center, radius).unwrap();
            let nearer = ring_error(&r, Approximation::Slip, &s, center, 0.1 * radius).unwrap();
            prop_assert!(nearer.is_finite() && nearer < 2.0 * near + 1.0, "{center}: {near} -> {nearer}");
        }
    }
}
