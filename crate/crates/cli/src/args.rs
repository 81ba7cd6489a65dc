use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fermion_duality::functions::ModelParams;

#[derive(Debug, Parser)]
#[command(name = "rlm-duality", version, about = "Resonant level model dynamics and fermionic duality checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Occupation and current traces: exact, semigroup and slip approximations.
    Dynamics(DynamicsArgs),
    /// max|g| and max|ḡ| over a (detuning/Γ, T/Γ) grid.
    DivisibilityMap(DivisibilityArgs),
    /// |(0|Π̂(E)|0)| and the approximation errors over a complex frequency grid.
    FrequencyMap(FrequencyArgs),
    /// Runs every duality relation and sum rule; exit 1 if any fails.
    DualityCheck(DualityArgs),
    /// CP-onset times of the slip approximation and breakdown couplings.
    Markov(MarkovArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the output to stdout.
    #[arg(long)]
    pub stdout: bool,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Level energy ε.
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    pub eps: f64,
    /// Reservoir potential μ.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mu: f64,
    /// Temperature.
    #[arg(long = "T", default_value_t = 0.25)]
    pub temperature: f64,
    /// Tunnel coupling Γ.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub gamma: f64,
}

impl ModelArgs {
    pub fn params(&self) -> anyhow::Result<ModelParams> {
        Ok(ModelParams::new(self.eps, self.mu, self.temperature, self.gamma)?)
    }
}

#[derive(Debug, Args)]
pub struct DynamicsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Initial state as a JSON 2×2 matrix of numbers or [re, im] pairs.
    #[arg(long, default_value = "[[1,0],[0,0]]")]
    pub rho0: String,
    /// Time grid `start:stop:count` in units of 1/Γ.
    #[arg(long, default_value = "0:10:201")]
    pub times: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DivisibilityArgs {
    /// Detuning axis `(ε−μ)/Γ` as `lo:hi`.
    #[arg(long = "eps-range", default_value = "0:3", allow_hyphen_values = true)]
    pub eps_range: String,
    /// Temperature axis `T/Γ` as `lo:hi`.
    #[arg(long = "T-range", default_value = "0.02:3")]
    pub t_range: String,
    /// Grid size `NXxNY`.
    #[arg(long, default_value = "121x121")]
    pub grid: String,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FrequencyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Real axis of E in units of Γ as `lo:hi`.
    #[arg(long = "re-range", default_value = "-1.5:1.5", allow_hyphen_values = true)]
    pub re_range: String,
    /// Imaginary axis of E in units of Γ as `lo:hi`.
    #[arg(long = "im-range", default_value = "-2.5:0.5", allow_hyphen_values = true)]
    pub im_range: String,
    /// Grid size `NXxNY`.
    #[arg(long, default_value = "121x121")]
    pub grid: String,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DualityArgs {
    /// Check an external family document instead of the built-in model.
    #[arg(long)]
    pub family: Option<PathBuf>,
    /// Write every sample the run needed as a family document.
    #[arg(long = "export-family")]
    pub export_family: Option<PathBuf>,
    /// Test hook: `gamma=<factor>` rescales Γ on the right-hand side of every relation.
    #[arg(long)]
    pub perturb: Option<String>,
    /// Overrides every tolerance of the suite.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of extra randomly drawn parameter sets.
    #[arg(long = "random-thetas", default_value_t = 0)]
    pub random_thetas: usize,
    /// Seed for the random parameter sets.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report file (JSON).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the report to stdout.
    #[arg(long)]
    pub stdout: bool,
}

#[derive(Debug, Args)]
pub struct MarkovArgs {
    /// Detuning axis `(ε−μ)/T` as `lo:hi` (log-spaced when both are positive).
    #[arg(long = "eps-range", default_value = "0.01:20", allow_hyphen_values = true)]
    pub eps_range: String,
    /// Coupling axis `Γ/T` as `lo:hi` (log-spaced when both are positive).
    #[arg(long = "gamma-range", default_value = "0.1:40")]
    pub gamma_range: String,
    /// Grid size `NXxNY`.
    #[arg(long, default_value = "25x49")]
    pub grid: String,
    /// Temperature setting the unit.
    #[arg(long = "T", default_value_t = 1.0)]
    pub temperature: f64,
    /// CP tolerance on the minimum Choi eigenvalue.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Largest breakdown index n reported per detuning.
    #[arg(long = "n-max", default_value_t = 2)]
    pub n_max: usize,
    /// Breakdown table file; defaults to `<out>.breakdown.csv` for CSV output.
    #[arg(long = "breakdown-out")]
    pub breakdown_out: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// `lo:hi`.
pub fn parse_range(s: &str) -> anyhow::Result<(f64, f64)> {
    let (a, b) = s.split_once(':').with_context(|| format!("range `{s}` is not of the form lo:hi"))?;
    let lo: f64 = a.trim().parse().with_context(|| format!("bad range bound `{a}`"))?;
    let hi: f64 = b.trim().parse().with_context(|| format!("bad range bound `{b}`"))?;
    if !lo.is_finite() || !hi.is_finite() || lo > hi {
        bail!("range `{s}` must be finite with lo ≤ hi");
    }
    Ok((lo, hi))
}

/// `NXxNY`.
pub fn parse_grid(s: &str) -> anyhow::Result<(usize, usize)> {
    let (a, b) = s.split_once(['x', 'X']).with_context(|| format!("grid `{s}` is not of the form NXxNY"))?;
    let nx: usize = a.trim().parse().with_context(|| format!("bad grid size `{a}`"))?;
    let ny: usize = b.trim().parse().with_context(|| format!("bad grid size `{b}`"))?;
    if nx == 0 || ny == 0 {
        bail!("grid `{s}` must be nonempty");
    }
    Ok((nx, ny))
}

/// `start:stop:count`.
pub fn parse_times(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts.as_slice() else {
        bail!("times `{s}` is not of the form start:stop:count");
    };
    let (lo, hi) = parse_range(&format!("{a}:{b}"))?;
    let n: usize = n.trim().parse().with_context(|| format!("bad count `{n}`"))?;
    if lo < 0.0 || n == 0 || (n > 1 && hi <= lo) {
        bail!("times `{s}` need 0 ≤ start < stop and count ≥ 1");
    }
    Ok(linspace(lo, hi, n))
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), n).into_iter().map(f64::exp).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ranges_grids_and_times() {
        assert_eq!(parse_range("-1.5:2").unwrap(), (-1.5, 2.0));
        assert!(parse_range("2:1").is_err());
        assert_eq!(parse_grid("3x4").unwrap(), (3, 4));
        assert!(parse_grid("0x4").is_err());
        assert_eq!(parse_times("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_times("1:0:3").is_err());
    }
}
