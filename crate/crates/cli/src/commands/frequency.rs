use fermion_duality::liouville::SuperOperator;
use fermion_duality::markov::slip_operator;
use fermion_duality::model::RlmProvider;
use fermion_duality::{Complex64, Error};
use rayon::prelude::*;

use super::{Cell, Table};
use crate::args::{linspace, parse_grid, parse_range, FrequencyArgs};
use crate::output::emit;
use crate::Failure;

/// Relative offset applied to grid points that land on a pole.
const POLE_NUDGE: f64 = 1e-6;

pub fn run(a: &FrequencyArgs) -> Result<u8, Failure> {
    let theta = a.model.params()?;
    let (re_lo, re_hi) = parse_range(&a.re_range)?;
    let (im_lo, im_hi) = parse_range(&a.im_range)?;
    let (nx, ny) = parse_grid(&a.grid)?;
    let rlm = RlmProvider::new(theta);
    let scale = if theta.gamma != 0.0 { theta.gamma.abs() } else { theta.temperature };
    let g_inf = rlm.stationary_generator()?;
    let slip = slip_operator(&rlm).ok().map(|s| s.matrix);
    if slip.is_none() {
        eprintln!("warning: slip unavailable at these parameters; abs_slip_error is nan");
    }
    let xs = linspace(re_lo * scale, re_hi * scale, nx);
    let ys = linspace(im_lo * scale, im_hi * scale, ny);
    let cells: Vec<Complex64> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y))).collect();
    let element = |m: &SuperOperator| m.entries()[(0, 0)];
    let rows: Vec<Vec<Cell>> = cells
        .par_iter()
        .map(|&e0| -> anyhow::Result<Vec<Cell>> {
            let mut e = e0;
            let exact = loop {
                match rlm.propagator_hat(e) {
                    Ok(m) => break m,
                    Err(Error::Pole(_)) => e += Complex64::new(POLE_NUDGE, POLE_NUDGE) * scale,
                    Err(err) => return Err(err.into()),
                }
            };
            let semigroup = match (&SuperOperator::identity(2).scale(e) - &g_inf).try_inverse() {
                Ok(inv) => Some(inv.scale(Complex64::i())),
                Err(_) => None,
            };
            let semi_err = semigroup.as_ref().map_or(f64::INFINITY, |s| (element(&exact) - element(s)).norm());
            let slip_err = match (&semigroup, &slip) {
                (Some(s), Some(sl)) => (element(&exact) - element(&(s * sl))).norm(),
                (None, Some(_)) => f64::INFINITY,
                _ => f64::NAN,
            };
            Ok(vec![Cell::Num(e.re), Cell::Num(e.im), Cell::Num(element(&exact).norm()), Cell::Num(semi_err), Cell::Num(slip_err)])
        })
        .collect::<anyhow::Result<_>>()?;
    let table = Table { columns: vec!["re_e", "im_e", "abs_exact", "abs_semigroup_error", "abs_slip_error"], rows };
    emit(&table.render(a.output.format), a.output.out.as_deref(), a.output.stdout)?;
    Ok(0)
}
