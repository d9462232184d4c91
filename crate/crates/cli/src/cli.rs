//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  other failure (I/O)
  2  malformed input or invalid parameters
  3  a theorem hypothesis is violated (the theorem is named)
  4  numerical failure, violated identity, or oracle violation
  5  hitting-time saturation (output is still written)";

const CSV_HELP: &str = "\
CSV columns of tails.csv (one row per n, side, t):
  n            sample length
  k            block length (empty for birkhoff and hitting-rate)
  side         two-sided |v-c| >= t, upper v-c > t, or lower v-c < -t
  t            deviation threshold
  p_hat        exceedances / trials
  ci_low       Wilson 95% lower bound
  ci_high      Wilson 95% upper bound
  exceedances  replicas in the tail event
  trials       replicas with a decided outcome
  saturated    hitting-time replicas that reached the horizon
  undecided    saturated replicas whose outcome is unknown at this t
  usable       false when more than 1% of replicas saturated
  estimable    10/trials <= p_hat <= 0.5
  bound_kind   fitted bound used for this side (empty if none)
  bound        that bound evaluated at (n, t)";

#[derive(Debug, Parser)]
#[command(name = "gibbs-entropy", version, about = "Gibbs measures, entropy estimators and concentration experiments")]
#[command(after_help = EXIT_CODES)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pressure, entropy, Gibbs constant bracket and eigen-solver diagnostics.
    Model(ModelArgs),
    /// Draw a stationary sample.
    Sample(SampleArgs),
    /// Plug-in (and optionally hitting-time) estimates on one sample.
    Estimate(EstimateArgs),
    /// Tail experiment from a JSON configuration.
    #[command(after_help = CSV_HELP)]
    Experiment(ExperimentArgs),
    /// Exhaustive oscillation check of the block entropy.
    Oracle(OracleArgs),
    /// Exponential law of rescaled hitting times of a word.
    Explaw(ExplawArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Potential JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// Cylinder depth of the Gibbs ratio report.
    #[arg(long, default_value_t = 8)]
    pub depth: usize,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Sample file; otherwise a sample of length --n is drawn from --model.
    #[arg(long, conflicts_with = "n")]
    pub sample: Option<PathBuf>,
    /// Alphabet size of a sample file without an `alphabet=` header.
    #[arg(long)]
    pub alphabet: Option<usize>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Block length; with --schedule it may not exceed k(n).
    #[arg(long)]
    pub k: Option<usize>,
    /// Block-length schedule.
    #[arg(long, value_parser = ["main1", "main2", "ow"])]
    pub schedule: Option<String>,
    /// α of the main1 schedule.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// θ of the main2 schedule (default: the potential's θ).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Also compute the hitting-time estimate against a fresh stream from --model.
    #[arg(long)]
    pub hitting: bool,
    /// Hitting-time horizon (default min(e^{n(h+3)}, 10^9)).
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Experiment JSON file.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the configured replica count.
    #[arg(long)]
    pub replicas: Option<usize>,
    /// Override the configured hitting-time horizon.
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Directory for tails.csv and summary.json (default: summary to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Sample length (or the largest one with --sweep).
    #[arg(long)]
    pub n: usize,
    /// Single block length (default: every k ≤ n).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub alphabet: usize,
    /// Check every n' ≤ n and k ≤ n'.
    #[arg(long, conflicts_with = "k")]
    pub sweep: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplawArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// The word, in sample notation (e.g. 00110).
    #[arg(long)]
    pub word: String,
    #[arg(long, default_value_t = 10_000)]
    pub replicas: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}
