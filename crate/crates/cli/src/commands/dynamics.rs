use anyhow::{bail, Context};
use fermion_duality::liouville::OperatorMatrix;
use fermion_duality::markov::{semigroup_propagator, slip_operator, slip_propagator};
use fermion_duality::model::RlmProvider;
use fermion_duality::Complex64;
use rayon::prelude::*;

use super::{Cell, Table};
use crate::args::{parse_times, DynamicsArgs};
use crate::output::emit;
use crate::Failure;

/// A 2×2 matrix given as JSON rows of numbers or `[re, im]` pairs.
pub fn parse_state(text: &str) -> anyhow::Result<OperatorMatrix> {
    let value: serde_json::Value = serde_json::from_str(text).context("--rho0 is not valid JSON")?;
    let rows = value.as_array().context("--rho0 must be an array of rows")?;
    if rows.len() != 2 || rows.iter().any(|r| r.as_array().map(|r| r.len()) != Some(2)) {
        bail!("--rho0 must be a 2×2 matrix");
    }
    let entry = |v: &serde_json::Value| -> anyhow::Result<Complex64> {
        if let Some(x) = v.as_f64() {
            return Ok(Complex64::new(x, 0.0));
        }
        match v.as_array().map(|a| a.as_slice()) {
            Some([re, im]) => Ok(Complex64::new(
                re.as_f64().context("real part is not a number")?,
                im.as_f64().context("imaginary part is not a number")?,
            )),
            _ => bail!("matrix entries must be numbers or [re, im] pairs"),
        }
    };
    let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.as_array().expect("checked").iter().enumerate() {
            m[i][j] = entry(v)?;
        }
    }
    Ok(OperatorMatrix::from_fn(2, |i, j| m[i][j]))
}

pub fn run(a: &DynamicsArgs) -> Result<u8, Failure> {
    let theta = a.model.params()?;
    if theta.gamma <= 0.0 {
        return Err(anyhow::anyhow!("dynamics needs Γ > 0").into());
    }
    let rho0 = parse_state(&a.rho0)?;
    let times: Vec<f64> = parse_times(&a.times)?.into_iter().map(|t| t / theta.gamma).collect();
    let rlm = RlmProvider::new(theta);
    // Validates the state once, so per-row failures are numerical only.
    rlm.occupation(0.0, &rho0)?;
    let slip = match slip_operator(&rlm) {
        Ok(s) => Some(s),
        Err(e) => {
            eprintln!("warning: slip approximation unavailable ({e}); occ_slip is nan");
            None
        }
    };
    let occupation = |rho: OperatorMatrix| (&RlmProvider::number() * &rho).trace().re;
    let rows: Vec<Vec<Cell>> = times
        .par_iter()
        .map(|&t| -> anyhow::Result<Vec<Cell>> {
            let semi = occupation(semigroup_propagator(&rlm, t)?.apply(&rho0));
            let slipped = match &slip {
                Some(s) => occupation(slip_propagator(&rlm, s, t)?.apply(&rho0)),
                None => f64::NAN,
            };
            Ok(vec![
                Cell::Num(t),
                Cell::Num(rlm.occupation(t, &rho0)?),
                Cell::Num(semi),
                Cell::Num(slipped),
                Cell::Num(rlm.current_from_generator(t, &rho0)?),
                Cell::Num(rlm.current(t, &rho0)?),
            ])
        })
        .collect::<anyhow::Result<_>>()?;
    let table = Table {
        columns: vec!["t", "occ_exact", "occ_semigroup", "occ_slip", "current_exact", "current_closed_form"],
        rows,
    };
    emit(&table.render(a.output.format), a.output.out.as_deref(), a.output.stdout)?;
    Ok(0)
}
