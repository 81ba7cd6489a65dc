use serde_json::json;

use super::family::SuperOpFamily;
use super::relations::{finish, heisenberg_generator, CheckOptions};
use super::report::{worst, ResidualReport, SamplePoint};
use crate::functions::ModelParams;
use crate::liouville::{
    canonical_kraus, gksl_decompose, gksl_decompose_heisenberg, outer, KrausSet, OperatorMatrix, Parity, SuperOperator,
};
use crate::{c64, Error};

/// Relative gap below which two coefficients are treated as degenerate and
/// their operators compared only through the summed projector.
const DEGENERACY_GAP: f64 = 1e-7;

struct Term {
    coefficient: f64,
    operator: OperatorMatrix,
    parity: Parity,
}

struct Matching {
    coefficient_residual: f64,
    operator_residual: f64,
    permutation: Vec<(usize, usize)>,
}

/// `min_φ ‖a − e^{iφ} b‖_max`, with the phase from `arg⟨b|a⟩`.
fn phase_aligned_residual(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    let overlap = b.hs_inner(a);
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c64(1.0, 0.0) };
    a.max_abs_diff(&b.scale(phase))
}

/// Greedy bipartite matching of `lhs` against `rhs` after mapping the right
/// coefficients; only equal parities are paired. Terms with coefficients at
/// most `negligible` may stay unmatched.
fn match_terms(lhs: &[Term], rhs: &[Term], map: impl Fn(&Term) -> f64, negligible: f64) -> Matching {
    let mapped: Vec<f64> = rhs.iter().map(&map).collect();
    let mut candidates = Vec::new();
    for (a, l) in lhs.iter().enumerate() {
        for (b, r) in rhs.iter().enumerate() {
            if l.parity == r.parity {
                candidates.push(((l.coefficient - mapped[b]).abs(), a, b));
            }
        }
    }
    candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let mut lhs_of = vec![None; rhs.len()];
    let mut rhs_of = vec![None; lhs.len()];
    let mut coefficient_residual: f64 = 0.0;
    for (score, a, b) in candidates {
        if rhs_of[a].is_none() && lhs_of[b].is_none() {
            rhs_of[a] = Some(b);
            lhs_of[b] = Some(a);
            coefficient_residual = worst(coefficient_residual, score);
        }
    }
    for (a, l) in lhs.iter().enumerate() {
        if rhs_of[a].is_none() && l.coefficient.abs() > negligible {
            coefficient_residual = worst(coefficient_residual, l.coefficient.abs());
        }
    }
    for (b, m) in mapped.iter().enumerate() {
        if lhs_of[b].is_none() && m.abs() > negligible {
            coefficient_residual = worst(coefficient_residual, m.abs());
        }
    }

    // Operators: singly for isolated coefficients, via projector sums within
    // degenerate clusters.
    let scale = lhs.iter().map(|t| t.coefficient.abs()).fold(1.0, f64::max);
    let mut operator_residual: f64 = 0.0;
    let mut done = vec![false; lhs.len()];
    for a in 0..lhs.len() {
        if done[a] || rhs_of[a].is_none() {
            continue;
        }
        let cluster: Vec<usize> = (a..lhs.len())
            .filter(|&c| {
                !done[c]
                    && rhs_of[c].is_some()
                    && lhs[c].parity == lhs[a].parity
                    && (lhs[c].coefficient - lhs[a].coefficient).abs() <= DEGENERACY_GAP * scale
            })
            .collect();
        for &c in &cluster {
            done[c] = true;
        }
        if cluster.len() == 1 {
            let b = rhs_of[a].expect("matched");
            operator_residual = worst(operator_residual, phase_aligned_residual(&lhs[a].operator, &rhs[b].operator));
        } else {
            let dim = lhs[a].operator.dim();
            let mut diff = SuperOperator::zeros(dim);
            for &c in &cluster {
                let b = rhs_of[c].expect("matched");
                diff = &diff + &outer(&lhs[c].operator, &lhs[c].operator);
                diff = &diff - &outer(&rhs[b].operator, &rhs[b].operator);
            }
            operator_residual = worst(operator_residual, diff.max_abs());
        }
    }
    let permutation = rhs_of.iter().enumerate().filter_map(|(a, b)| b.map(|b| (a, b))).collect();
    Matching { coefficient_residual, operator_residual, permutation }
}

/// Kraus duality `M_α(t)† = M̄_{α'}(t)`, `m_α(t) = e^{−Γt}(−1)^{N_{α'}} m̄_{α'}(t)`,
/// with both sets from the canonical decomposition.
pub fn check_kraus_duality(family: &dyn SuperOpFamily, theta: &ModelParams, t: f64, opts: &CheckOptions) -> ResidualReport {
    let outcome = (|| {
        let parity = family.parity_operator();
        let (dual, gamma) = opts.rhs_dual(family, theta);
        let kx = canonical_kraus(&family.propagator(theta, t)?, &parity)?;
        let ky = canonical_kraus(&family.propagator(&dual, t)?, &parity)?;
        let lhs: Vec<Term> = kx
            .terms
            .iter()
            .map(|k| Term { coefficient: k.coefficient, operator: k.operator.dagger(), parity: k.parity })
            .collect();
        let rhs: Vec<Term> = ky
            .terms
            .iter()
            .map(|k| Term { coefficient: k.coefficient, operator: k.operator.clone(), parity: k.parity })
            .collect();
        let decay = (-gamma * t).exp();
        let m = match_terms(&lhs, &rhs, |r| decay * r.parity.sign() * r.coefficient, opts.tol);
        let witness = json!({
            "permutation": m.permutation,
            "coefficient_residual": m.coefficient_residual,
            "operator_residual": m.operator_residual,
        });
        Ok((worst(m.coefficient_residual, m.operator_residual), witness))
    })();
    finish("kraus_duality", theta, vec![SamplePoint::Time(t)], opts.tol, outcome)
}

/// Residuals of the four Kraus sum rules at time `t`:
/// `Σ m M†M = 𝟙`, `Σ (−1)^N m MM† = e^{−Γt}𝟙`, and the even and odd
/// coefficient weights `d(1 ± e^{−Γt})/2`.
pub fn kraus_sum_rule_residuals(kraus: &KrausSet, dim: usize, gamma: f64, t: f64) -> [f64; 4] {
    let decay = (-gamma * t).exp();
    let one = OperatorMatrix::identity(dim);
    let mut tp = one.scale(c64(-1.0, 0.0));
    let mut parity_rule = one.scale(c64(-decay, 0.0));
    let (mut even, mut odd) = (0.0, 0.0);
    for k in &kraus.terms {
        let w = c64(k.coefficient, 0.0);
        tp = &tp + &(&k.operator.dagger() * &k.operator).scale(w);
        parity_rule = &parity_rule + &(&k.operator * &k.operator.dagger()).scale(w * k.parity.sign());
        match k.parity {
            Parity::Even => even += k.coefficient,
            Parity::Odd => odd += k.coefficient,
        }
    }
    let d = dim as f64;
    [tp.max_abs(), parity_rule.max_abs(), (even - 0.5 * d * (1.0 + decay)).abs(), (odd - 0.5 * d * (1.0 - decay)).abs()]
}

/// Sum rules for a given Kraus set; `gamma` is the coupling of the model.
pub fn check_kraus_sum_rules(kraus: &KrausSet, dim: usize, theta: &ModelParams, gamma: f64, t: f64, tol: f64) -> ResidualReport {
    let r = kraus_sum_rule_residuals(kraus, dim, gamma, t);
    let witness = json!({ "trace": r[0], "parity": r[1], "even_weight": r[2], "odd_weight": r[3] });
    let max = r.iter().copied().fold(0.0, worst);
    ResidualReport::new("kraus_sum_rules", *theta, vec![SamplePoint::Time(t)], max, tol).with_witness(witness)
}

/// Kraus sum rules on the canonical decomposition of the family's propagator.
pub fn check_kraus_sum_rules_family(family: &dyn SuperOpFamily, theta: &ModelParams, t: f64, opts: &CheckOptions) -> ResidualReport {
    let (_, gamma) = opts.rhs_same(family, theta);
    match family.propagator(theta, t).and_then(|pi| canonical_kraus(&pi, &family.parity_operator())) {
        Ok(k) => check_kraus_sum_rules(&k, family.dim(), theta, gamma, t, opts.tol),
        Err(e) => ResidualReport::failed("kraus_sum_rules", *theta, vec![SamplePoint::Time(t)], opts.tol, &e),
    }
}

/// Jump duality: the Heisenberg expansion of `[Π⁻¹GΠ]‡` has Hamiltonian
/// `−H̄`, operators `J̄_{α'}` and rates `(−1)^{N_{α'}} j̄_{α'}`. Also checks
/// `Σ j_α[J_α†J_α − (−1)^{N_α}J_αJ_α†] = Γ𝟙` and `Σ_odd j_α = dΓ/2` on the
/// Schrödinger expansion of `G(t)`.
pub fn check_jump_duality(family: &dyn SuperOpFamily, theta: &ModelParams, t: f64, opts: &CheckOptions) -> ResidualReport {
    let outcome = (|| {
        let parity = family.parity_operator();
        let dim = family.dim();
        let (dual, _) = opts.rhs_dual(family, theta);
        let (_, gamma_same) = opts.rhs_same(family, theta);
        let heisenberg = gksl_decompose_heisenberg(&heisenberg_generator(family, theta, t)?, &parity)?;
        let dual_set = gksl_decompose(&family.generator(&dual, t)?, &parity)?;
        let hamiltonian_residual =
            heisenberg.effective_hamiltonian.max_abs_diff(&dual_set.effective_hamiltonian.scale(c64(-1.0, 0.0)));
        let to_terms = |set: &crate::liouville::JumpSet| -> Vec<Term> {
            set.terms
                .iter()
                .map(|j| Term { coefficient: j.rate, operator: j.operator.clone(), parity: j.parity })
                .collect()
        };
        let m = match_terms(&to_terms(&heisenberg), &to_terms(&dual_set), |r| r.parity.sign() * r.coefficient, opts.tol);

        let schroedinger = gksl_decompose(&family.generator(theta, t)?, &parity)?;
        let sum_rule = schroedinger.sum_rule_residual(gamma_same);
        let odd_rule = (schroedinger.odd_rate_sum() - 0.5 * dim as f64 * gamma_same).abs();
        if !sum_rule.is_finite() {
            return Err(Error::Reconstruction { residual: sum_rule });
        }
        let witness = json!({
            "permutation": m.permutation,
            "hamiltonian_residual": hamiltonian_residual,
            "rate_residual": m.coefficient_residual,
            "operator_residual": m.operator_residual,
            "sum_rule_residual": sum_rule,
            "odd_rate_residual": odd_rule,
            "heisenberg_rates": heisenberg.terms.iter().map(|j| j.rate).collect::<Vec<_>>(),
        });
        let r = [hamiltonian_residual, m.coefficient_residual, m.operator_residual, sum_rule, odd_rule]
            .into_iter()
            .fold(0.0, worst);
        Ok((r, witness))
    })();
    finish("jump_duality", theta, vec![SamplePoint::Time(t)], opts.tol, outcome)
}
