use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::functions::{k_hat, ModelParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakdownConfig {
    /// Peaks of `|k̂(−iΓ/2)|` below this are ignored.
    pub threshold: f64,
    /// Scan step in units of `min(|ε−μ|, T)`.
    pub step_factor: f64,
}

impl Default for BreakdownConfig {
    fn default() -> Self {
        Self { threshold: 10.0, step_factor: 0.25 }
    }
}

fn magnitude(gamma: f64, theta: &ModelParams) -> f64 {
    let th = theta.with_gamma(gamma);
    k_hat(Complex64::new(0.0, -0.5 * gamma), &th).map(|z| z.norm()).unwrap_or(f64::INFINITY)
}

/// Couplings `Γ` at which the slip coefficient `|k̂(−iΓ/2)|` peaks.
///
/// Scans `Γ ∈ (0, 2πT(2n_max + 2)]`, refines every local maximum above the
/// threshold by golden-section search, and keeps peaks with index in
/// `n_range` (peak `n` is the one closest to `(2n + 1)·2πT`).
pub fn breakdown_locator(
    temperature: f64,
    detuning: f64,
    n_range: std::ops::RangeInclusive<usize>,
    cfg: &BreakdownConfig,
) -> Result<Vec<f64>> {
    if detuning == 0.0 {
        return Err(Error::InvalidInput("breakdown points need a nonzero detuning".into()));
    }
    let theta = ModelParams::new(detuning, 0.0, temperature, 1.0)?;
    let top = 2.0 * PI * temperature * (2 * n_range.end() + 2) as f64;
    let step = cfg.step_factor * detuning.abs().min(temperature);
    let n = (top / step).ceil() as usize;
    let values: Vec<f64> = (0..=n).into_par_iter().map(|i| magnitude(i as f64 * step, &theta)).collect();
    let mut peaks = Vec::new();
    for i in 1..n {
        if values[i] >= values[i - 1] && values[i] > values[i + 1] && values[i] > cfg.threshold {
            let peak = golden_max(|g| magnitude(g, &theta), (i - 1) as f64 * step, (i + 1) as f64 * step);
            let index = (peak / (2.0 * PI * temperature) - 1.0) / 2.0;
            let index = index.round().max(0.0) as usize;
            if n_range.contains(&index) {
                peaks.push(peak);
            }
        }
    }
    Ok(peaks)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if (b - a).abs() < 1e-13 * b.abs().max(1.0) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
