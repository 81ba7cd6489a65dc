use std::collections::BTreeSet;
use std::fs;

use anyhow::{bail, Context};
use fermion_duality::functions::ModelParams;
use fermion_duality::verify::{export_family, run_suite, RlmFamily, SampledFamily, SuiteConfig, SuperOpFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::args::DualityArgs;
use crate::output::emit;
use crate::Failure;

/// `gamma=<factor>`.
fn parse_perturbation(s: &str) -> anyhow::Result<f64> {
    let (key, value) = s.split_once('=').with_context(|| format!("perturbation `{s}` is not of the form gamma=<factor>"))?;
    if key.trim() != "gamma" {
        bail!("only the `gamma` perturbation is supported, got `{key}`");
    }
    let factor: f64 = value.trim().parse().with_context(|| format!("bad perturbation factor `{value}`"))?;
    if !(factor.is_finite() && factor > 0.0) {
        bail!("perturbation factor must be positive");
    }
    Ok(factor)
}

/// Extra parameter sets at `Γ = 1`, `μ = 0` with `πT > Γ/2`.
fn random_thetas(n: usize, seed: u64) -> Vec<ModelParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| ModelParams { epsilon: rng.gen_range(-2.0..2.0), mu: 0.0, temperature: rng.gen_range(0.2..1.5), gamma: 1.0 })
        .collect()
}

/// Without `--out` or `--stdout` only the exit code and stderr diagnostics
/// carry the verdict.
pub fn run(a: &DualityArgs) -> Result<u8, Failure> {
    let mut cfg = SuiteConfig::default();
    if let Some(p) = &a.perturb {
        cfg.rhs_gamma_factor = parse_perturbation(p)?;
    }
    if let Some(tol) = a.tol {
        if !(tol > 0.0) {
            return Err(anyhow::anyhow!("--tol must be positive").into());
        }
        cfg.tolerances.closed_form = tol;
        cfg.tolerances.inverted = tol;
        cfg.tolerances.quadrature = tol;
        cfg.tolerances.functional = tol;
    }
    let rlm = RlmFamily::new();
    let sampled;
    let family: &dyn SuperOpFamily = match &a.family {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            sampled = SampledFamily::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if sampled.thetas().is_empty() {
                return Err(anyhow::anyhow!("family document has no physical parameter sets").into());
            }
            cfg.thetas = sampled.thetas().to_vec();
            &sampled
        }
        None => &rlm,
    };
    cfg.thetas.extend(random_thetas(a.random_thetas, a.seed));

    if let Some(path) = &a.export_family {
        let doc = export_family(family, &cfg);
        let mut text = serde_json::to_string(&doc).context("serializing family")?;
        text.push('\n');
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    let reports = run_suite(family, &cfg);
    let failed = reports.iter().filter(|r| !r.pass).count();
    let ids: BTreeSet<&str> = reports.iter().map(|r| r.relation_id.as_str()).collect();
    for r in reports.iter().filter(|r| !r.pass) {
        eprintln!(
            "FAIL {} at ε={} μ={} T={} Γ={}: residual {:e} > {:e}{}",
            r.relation_id,
            r.params.epsilon,
            r.params.mu,
            r.params.temperature,
            r.params.gamma,
            r.max_residual,
            r.tolerance,
            r.error.as_deref().map(|e| format!(" ({e})")).unwrap_or_default()
        );
    }
    let doc = json!({
        "all_pass": failed == 0,
        "relation_ids": ids,
        "report_count": reports.len(),
        "failed_count": failed,
        "rhs_gamma_factor": cfg.rhs_gamma_factor,
        "reports": reports,
    });
    let mut text = serde_json::to_string_pretty(&doc).context("serializing report")?;
    text.push('\n');
    if a.out.is_some() || a.stdout {
        emit(&text, a.out.as_deref(), a.stdout)?;
    }
    Ok(if failed == 0 { 0 } else { 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbation_syntax() {
        assert_eq!(parse_perturbation("gamma=1.01").unwrap(), 1.01);
        assert!(parse_perturbation("eps=1.01").is_err());
        assert!(parse_perturbation("gamma=-1").is_err());
    }

    #[test]
    fn random_thetas_are_reproducible() {
        assert_eq!(random_thetas(3, 7), random_thetas(3, 7));
        assert!(random_thetas(50, 1).iter().all(|t| std::f64::consts::PI * t.temperature > 0.5));
    }
}
