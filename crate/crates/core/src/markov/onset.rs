use serde::Serialize;

use super::semigroup::slip_propagator;
use super::slip::SlipOperator;
use crate::liouville::choi_of;
use crate::model::RlmProvider;
use crate::{Error, Result};

/// Outcome of the CP-onset search for the slip propagator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "time", rename_all = "snake_case")]
pub enum CpOnset {
    /// CP from this time on (within the horizon).
    Time(f64),
    /// Not CP at the horizon.
    Never,
    /// CP at every sampled time including `t = 0`.
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnsetConfig {
    /// Horizon; `None` uses [`default_onset_horizon`].
    pub t_max: Option<f64>,
    /// Minimum Choi eigenvalue counted as CP is `−tol`.
    pub tol: f64,
    /// Log-spaced scan points in `(0, t_max]`.
    pub scan_points: usize,
    /// Smallest scanned time relative to `t_max`.
    pub scan_floor: f64,
    /// Samples after the candidate onset on which CP must hold.
    pub persistence_samples: usize,
    /// Bisection stops at this relative bracket width.
    pub bisection_rel_tol: f64,
}

impl Default for OnsetConfig {
    fn default() -> Self {
        Self { t_max: None, tol: 1e-9, scan_points: 512, scan_floor: 1e-9, persistence_samples: 64, bisection_rel_tol: 1e-10 }
    }
}

/// `10³ / min(|Γ|, T)`.
pub fn default_onset_horizon(rlm: &RlmProvider) -> f64 {
    let th = rlm.params();
    1e3 / th.gamma.abs().min(th.temperature)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![hi];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Time after which `e^{−iG(∞)t} S` stays completely positive.
///
/// A log-spaced scan locates the last non-CP sample; the sign change is then
/// bisected and CP is required on `persistence_samples` later times. If a
/// later violation shows up the search restarts from there.
pub fn cp_onset_time(rlm: &RlmProvider, slip: &SlipOperator, cfg: &OnsetConfig) -> Result<CpOnset> {
    let t_max = cfg.t_max.unwrap_or_else(|| default_onset_horizon(rlm));
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidInput(format!("onset horizon must be positive, got {t_max}")));
    }
    let is_cp = |t: f64| -> Result<bool> {
        let m = slip_propagator(rlm, slip, t)?;
        Ok(choi_of(&m).min_eigenvalue() >= -cfg.tol)
    };
    let mut grid = vec![0.0];
    grid.extend(log_grid(cfg.scan_floor * t_max, t_max, cfg.scan_points));
    let flags = grid.iter().map(|&t| is_cp(t)).collect::<Result<Vec<bool>>>()?;
    let Some(mut last_bad) = flags.iter().rposition(|ok| !ok) else {
        return Ok(CpOnset::Always);
    };
    if last_bad + 1 == grid.len() {
        return Ok(CpOnset::Never);
    }
    let (mut bad, mut good) = (grid[last_bad], grid[last_bad + 1]);
    loop {
        while good - bad > cfg.bisection_rel_tol * good {
            let mid = 0.5 * (bad + good);
            if is_cp(mid)? {
                good = mid;
            } else {
                bad = mid;
            }
        }
        let later = log_grid(good, t_max, cfg.persistence_samples + 1);
        match later[1..].iter().position(|&t| !is_cp(t).unwrap_or(false)) {
            None => return Ok(CpOnset::Time(good)),
            Some(k) => {
                let violation = later[k + 1];
                if violation >= t_max {
                    return Ok(CpOnset::Never);
                }
                last_bad = grid.partition_point(|&t| t <= violation);
                bad = violation;
                good = grid.get(last_bad).copied().unwrap_or(t_max).max(violation);
                if !is_cp(good)? {
                    return Ok(CpOnset::Never);
                }
            }
        }
    }
}
