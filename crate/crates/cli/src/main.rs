// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "depthguard",
    version,
    about = "Data depth with differential privacy"
)]
struct Cli {
    /// Append-only privacy ledger (JSON lines).
    #[arg(
        long,
        global = true,
        env = "DEPTHGUARD_LEDGER",
        default_value = "depthguard-ledger.jsonl"
    )]
    ledger: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Non-private depth of a point or of every sample point.
    Depth(DepthArgs),
    /// Run a private estimator and record its spend in the ledger.
    Private(PrivateArgs),
    /// Monte Carlo sweeps emitted as tidy CSV.
    Experiment(ExperimentArgs),
    /// Empirical privacy-loss audit of the Laplace depth mechanism.
    Audit(AuditArgs),
    /// Summarize the ledger, or split a budget by advanced composition.
    Budget(BudgetArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Halfspace,
    Irw,
    Simplicial,
    Projection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScaleArg {
    /// Median absolute deviation.
    O1,
    /// Interquartile range.
    O2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Laplace,
    Gaussian,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file, one row per individual.
    #[arg(long)]
    pub data: PathBuf,
    /// Skip the first line of the CSV file.
    #[arg(long)]
    pub header: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DepthOptions {
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    /// Outlyingness scale, required for projection depth.
    #[arg(long, value_enum)]
    pub variant: Option<ScaleArg>,
    /// Number of random projection directions.
    #[arg(long, default_value_t = 500)]
    pub directions: usize,
    /// Monte Carlo draws for simplicial depth (exact enumeration if absent).
    #[arg(long)]
    pub simplicial_draws: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[command(flatten)]
    pub input: DataArgs,
    #[command(flatten)]
    pub depth: DepthOptions,
    /// Comma-separated query point.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "vector")]
    pub point: Option<String>,
    /// Depth of every sample point.
    #[arg(long)]
    pub vector: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Estimator {
    /// Noisy depth of one point.
    Point,
    /// Noisy depths of all sample points.
    Vector,
    /// Projection depth through propose-test-release.
    Projection,
    /// Exponential-mechanism depth median on a grid.
    MedianExp,
    /// Truncated projection median through propose-test-release.
    MedianPtr,
    /// Depth-rank test for a scale difference between two samples.
    RankTest,
}

#[derive(Debug, Args)]
pub struct PrivateArgs {
    #[arg(value_enum)]
    pub estimator: Estimator,
    #[command(flatten)]
    pub input: DataArgs,
    #[command(flatten)]
    pub depth: DepthOptions,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
    #[arg(long)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, value_enum, default_value = "laplace")]
    pub noise: NoiseArg,
    /// PTR radius; defaults to log(n)/n^0.65.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Truncation radius for the projection median.
    #[arg(long = "m-n")]
    pub m_n: Option<String>,
    /// Per-axis candidate bounds, e.g. `-2:2,-2:2`.
    #[arg(long, allow_hyphen_values = true)]
    pub grid_bounds: Option<String>,
    #[arg(long, default_value_t = 21)]
    pub grid_points: usize,
    /// `uniform` or `gaussian`.
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    #[arg(long, default_value_t = 1.0)]
    pub prior_scale: f64,
    /// Comma-separated prior center (origin by default).
    #[arg(long, allow_hyphen_values = true)]
    pub prior_center: Option<String>,
    /// Second sample for the rank test.
    #[arg(long)]
    pub group_b: Option<PathBuf>,
    #[arg(long, default_value_t = 2000)]
    pub permutations: usize,
    /// Refuse to run if the ledger's epsilon total would exceed this.
    #[arg(long)]
    pub budget_cap: Option<f64>,
    /// Refuse to run if the ledger's delta total would exceed this.
    #[arg(long)]
    pub delta_cap: Option<f64>,
    /// Include mechanism internals computed from the raw data. Not private.
    #[arg(long)]
    pub unsafe_audit: bool,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// consistency, audit, power, ptr-depth or ptr-median.
    pub name: String,
    #[arg(long, default_value_t = 20)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, default_value_t = 20)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// Multiplies the calibrated noise scale; below 1 is a negative control.
    #[arg(long, default_value_t = 1.0)]
    pub noise_factor: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct BudgetArgs {
    /// Also report advanced composition of the ledger with this delta'.
    #[arg(long)]
    pub delta_prime: Option<f64>,
    /// Split this target epsilon over `--k` mechanisms instead.
    #[arg(long, requires_all = ["k", "delta_prime"])]
    pub split: Option<f64>,
    #[arg(long)]
    pub k: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Depth(args) => run::depth(&args),
        Command::Private(args) => run::private(&args, &cli.ledger),
        Command::Experiment(args) => run::experiment(&args),
        Command::Audit(args) => run::audit(&args),
        Command::Budget(args) => run::budget(&args, &cli.ledger),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("depthguard: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
