use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::functions::{g_increment, ModelParams, QuadratureConfig};
use crate::Result;

/// Which function to scan: `g` or its dual `ḡ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    G,
    GDual,
}

/// Scan settings for [`divisibility_max`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Horizon in units of `1/min(Γ, πT)`.
    pub horizon_factor: f64,
    /// Minimum number of grid points; more are used to resolve fast oscillations.
    pub points: usize,
    pub max_points: usize,
    /// Number of largest grid maxima refined by golden-section search.
    pub refine: usize,
    /// `|ḡ|` beyond this bound counts as divergent if it is still growing.
    pub divergence_bound: f64,
    /// Required ratio between the late and early halves of the scan.
    pub growth_ratio: f64,
    /// Cap on the horizon extension for slowly growing `ḡ`, in units of `1/Γ`.
    pub max_horizon_factor: f64,
    pub quad: QuadratureConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            horizon_factor: 40.0,
            points: 2000,
            max_points: 200_000,
            refine: 3,
            divergence_bound: 1e3,
            growth_ratio: 10.0,
            max_horizon_factor: 1e5,
            quad: QuadratureConfig::default(),
        }
    }
}

/// Result of a divisibility scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DivisibilityMax {
    Finite { value: f64, argmax: f64 },
    Diverges,
}

impl DivisibilityMax {
    pub fn value(&self) -> f64 {
        match self {
            Self::Finite { value, .. } => *value,
            Self::Diverges => f64::INFINITY,
        }
    }
}

/// `max_{t ≥ 0} |g(t)|` or `max_{t ≥ 0} |ḡ(t)|` from a dense scan.
///
/// `g` is accumulated over the grid from panel increments, then the largest
/// local maxima are refined. For `ḡ` the horizon is stretched to resolve
/// the growth rate `Γ/2 − πT` when it is positive.
pub fn divisibility_max(which: Which, theta: &ModelParams, cfg: &ScanConfig) -> Result<DivisibilityMax> {
    theta.validate()?;
    let target = match which {
        Which::G => *theta,
        Which::GDual => theta.dual(),
    };
    if theta.detuning() == 0.0 {
        return Ok(DivisibilityMax::Finite { value: 0.0, argmax: 0.0 });
    }
    let gamma = theta.gamma.abs();
    let thermal = PI * theta.temperature;
    let slowest = if gamma > 0.0 { gamma.min(thermal) } else { thermal };
    let mut horizon = cfg.horizon_factor / slowest;
    let growth = -0.5 * target.gamma - thermal;
    if growth > 0.0 && gamma > 0.0 {
        horizon = horizon.max(cfg.horizon_factor / growth).min(cfg.max_horizon_factor / gamma);
    }

    // At least eight points per half period of sin(Δt).
    let resolving = (horizon * 8.0 * theta.detuning().abs() / PI).ceil() as usize;
    let n = cfg.points.max(resolving).min(cfg.max_points.max(cfg.points)).max(2);
    let step = horizon / n as f64;
    let mut values = Vec::with_capacity(n + 1);
    values.push(0.0);
    let mut acc: f64 = 0.0;
    for i in 1..=n {
        // Accuracy is needed relative to the running value, not to each increment.
        let quad = QuadratureConfig { abs_tol: cfg.quad.abs_tol.max(cfg.quad.rel_tol * acc.abs()), ..cfg.quad };
        acc += g_increment((i - 1) as f64 * step, i as f64 * step, &target, &quad)?;
        values.push(acc);
    }

    if which == Which::GDual && growth > 0.0 {
        let half = n / 2;
        let early = values[..=half].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let late = values[half..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if late > cfg.divergence_bound && late >= cfg.growth_ratio * early {
            return Ok(DivisibilityMax::Diverges);
        }
    }

    // Interior local maxima of |g|, largest first.
    let mut peaks: Vec<usize> =
        (1..n).filter(|&i| values[i].abs() >= values[i - 1].abs() && values[i].abs() >= values[i + 1].abs()).collect();
    peaks.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()));
    let best = (0..=n).max_by(|&a, &b| values[a].abs().total_cmp(&values[b].abs())).unwrap_or(0);
    let mut best_abs = values[best].abs();
    let mut argmax = best as f64 * step;
    for &i in peaks.iter().take(cfg.refine) {
        let left = (i - 1) as f64 * step;
        let base = values[i - 1];
        let f = |t: f64| -> Result<f64> { Ok((base + g_increment(left, t, &target, &cfg.quad)?).abs()) };
        let (t, v) = golden_max(f, left, left + 2.0 * step, 40)?;
        if v > best_abs {
            best_abs = v;
            argmax = t;
        }
    }
    Ok(DivisibilityMax::Finite { value: best_abs, argmax })
}

fn golden_max(f: impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64, iterations: usize) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..iterations {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}
