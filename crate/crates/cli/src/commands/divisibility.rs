use anyhow::Context;
use fermion_duality::functions::ModelParams;
use fermion_duality::model::{divisibility_max, DivisibilityMax, ScanConfig, Which};
use rayon::prelude::*;

use super::{Cell, Table};
use crate::args::{linspace, parse_grid, parse_range, DivisibilityArgs};
use crate::output::emit;
use crate::Failure;

pub fn run(a: &DivisibilityArgs) -> Result<u8, Failure> {
    let (x_lo, x_hi) = parse_range(&a.eps_range)?;
    let (y_lo, y_hi) = parse_range(&a.t_range)?;
    let (nx, ny) = parse_grid(&a.grid)?;
    if !(a.gamma > 0.0) || y_lo <= 0.0 {
        return Err(anyhow::anyhow!("divisibility-map needs Γ > 0 and a positive temperature axis").into());
    }
    let xs = linspace(x_lo, x_hi, nx);
    let ys = linspace(y_lo, y_hi, ny);
    let cells: Vec<(f64, f64)> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).collect();
    let cfg = ScanConfig::default();
    let gamma = a.gamma;
    let rows: Vec<Vec<Cell>> = cells
        .par_iter()
        .map(|&(x, y)| -> anyhow::Result<Vec<Cell>> {
            let cell = || format!("cell x = {x}, y = {y}");
            let theta = ModelParams::new(x * gamma, 0.0, y * gamma, gamma)?;
            let g = divisibility_max(Which::G, &theta, &cfg).with_context(cell)?.value();
            let dual = match divisibility_max(Which::GDual, &theta, &cfg).with_context(cell)? {
                DivisibilityMax::Finite { value, .. } => Cell::Num(value),
                DivisibilityMax::Diverges => Cell::Text("inf".into()),
            };
            Ok(vec![Cell::Num(x), Cell::Num(y), Cell::Num(g), dual])
        })
        .collect::<anyhow::Result<_>>()?;
    let table = Table { columns: vec!["x", "y", "max_g", "max_g_dual"], rows };
    emit(&table.render(a.output.format), a.output.out.as_deref(), a.output.stdout)?;
    Ok(0)
}
