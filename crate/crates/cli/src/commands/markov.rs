use std::path::PathBuf;

use fermion_duality::functions::ModelParams;
use fermion_duality::markov::{breakdown_locator, cp_onset_time, slip_operator, BreakdownConfig, CpOnset, OnsetConfig};
use fermion_duality::model::RlmProvider;
use rayon::prelude::*;
use serde_json::json;

use super::{Cell, Table};
use crate::args::{linspace, logspace, parse_grid, parse_range, Format, MarkovArgs};
use crate::output::emit;
use crate::Failure;

fn axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if lo > 0.0 && hi > 0.0 {
        logspace(lo, hi, n)
    } else {
        linspace(lo, hi, n)
    }
}

fn onset_cell(onset: &anyhow::Result<CpOnset>, temperature: f64) -> Cell {
    match onset {
        Ok(CpOnset::Time(t)) => Cell::Num(t * temperature),
        Ok(CpOnset::Never) => Cell::Text("never".into()),
        Ok(CpOnset::Always) => Cell::Text("always".into()),
        Err(_) => Cell::Text("undefined".into()),
    }
}

pub fn run(a: &MarkovArgs) -> Result<u8, Failure> {
    let (x_lo, x_hi) = parse_range(&a.eps_range)?;
    let (y_lo, y_hi) = parse_range(&a.gamma_range)?;
    let (nx, ny) = parse_grid(&a.grid)?;
    let temp = a.temperature;
    if !(temp > 0.0) || y_lo <= 0.0 || !(a.tol >= 0.0) {
        return Err(anyhow::anyhow!("markov needs T > 0, a positive Γ/T axis and a nonnegative tolerance").into());
    }
    let xs = axis(x_lo, x_hi, nx);
    let ys = axis(y_lo, y_hi, ny);
    let cells: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let cfg = OnsetConfig { tol: a.tol, ..OnsetConfig::default() };
    let rows: Vec<Vec<Cell>> = cells
        .par_iter()
        .map(|&(x, y)| -> anyhow::Result<Vec<Cell>> {
            let rlm = RlmProvider::new(ModelParams::new(x * temp, 0.0, temp, y * temp)?);
            let onset = slip_operator(&rlm).map_err(anyhow::Error::from).and_then(|s| Ok(cp_onset_time(&rlm, &s, &cfg)?));
            if let Err(e) = &onset {
                eprintln!("warning: no onset at (ε−μ)/T = {x}, Γ/T = {y}: {e}");
            }
            Ok(vec![Cell::Num(x), Cell::Num(y), onset_cell(&onset, temp)])
        })
        .collect::<anyhow::Result<_>>()?;
    let onset_table = Table { columns: vec!["detuning_over_t", "gamma_over_t", "cp_onset_t"], rows };

    let mut breakdown_rows = Vec::new();
    for &x in xs.iter().filter(|&&x| x != 0.0) {
        let peaks = breakdown_locator(temp, x * temp, 0..=a.n_max, &BreakdownConfig::default())?;
        for gamma in peaks {
            let n = ((gamma / (2.0 * std::f64::consts::PI * temp) - 1.0) / 2.0).round().max(0.0);
            breakdown_rows.push(vec![Cell::Num(x), Cell::Num(n), Cell::Num(gamma / temp)]);
        }
    }
    let breakdown_table = Table { columns: vec!["detuning_over_t", "n", "gamma_over_t"], rows: breakdown_rows };

    match a.output.format {
        Format::Json => {
            let parse = |t: &Table| serde_json::from_str::<serde_json::Value>(&t.render(Format::Json)).expect("valid table json");
            let mut text = serde_json::to_string_pretty(&json!({
                "onset": parse(&onset_table),
                "breakdown": parse(&breakdown_table),
            }))
            .map_err(anyhow::Error::from)?;
            text.push('\n');
            emit(&text, a.output.out.as_deref(), a.output.stdout)?;
        }
        Format::Csv => {
            let onset_csv = onset_table.render(Format::Csv);
            let breakdown_csv = breakdown_table.render(Format::Csv);
            if a.output.stdout {
                emit(&format!("{onset_csv}\n{breakdown_csv}"), None, true)?;
            }
            if let Some(out) = &a.output.out {
                emit(&onset_csv, Some(out), false)?;
                let side = a.breakdown_out.clone().unwrap_or_else(|| {
                    let mut p = out.clone().into_os_string();
                    p.push(".breakdown.csv");
                    PathBuf::from(p)
                });
                emit(&breakdown_csv, Some(&side), false)?;
            } else if !a.output.stdout {
                emit("", None, false)?;
            }
        }
    }
    Ok(0)
}
