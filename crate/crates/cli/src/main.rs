// SPDX-License-Identifier: MIT OR Apache-2.0

//! `slopeseg`: continuous piecewise-linear segmentation from the command line.

mod commands;
mod error;
mod input;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "slopeseg",
    version,
    about = "Change-in-slope segmentation over a finite grid of states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Segment a series (CSV, one value per row, optional `value` header)
    Segment(SegmentArgs),
    /// Estimate the noise standard deviation of a series
    Variance(VarianceArgs),
    /// Generate a noisy series from a known signal
    Simulate(SimulateArgs),
    /// Run one of the benchmark experiments
    Benchmark(BenchmarkArgs),
    /// Measure an inhibition diameter on a radial intensity profile
    Profile(ProfileArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum ConstraintArg {
    None,
    Isotonic,
    Unimodal,
    Minangle,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PruningArg {
    None,
    Channel,
    Inequality,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Experiment {
    PenaltyScan,
    PruningEfficiency,
    Timing,
    Robustness,
    StatesDensity,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum NoiseArg {
    Gaussian,
    Student,
}

#[derive(Args, Debug)]
struct GridArgs {
    /// State grid as min:max:step (inclusive)
    #[arg(long, conflicts_with = "states_file")]
    states: Option<String>,
    /// State grid file, one value per line
    #[arg(long)]
    states_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConstraintArgs {
    #[arg(long, value_enum, default_value_t = ConstraintArg::None)]
    constraint: ConstraintArg,
    /// Minimal interior angle in degrees; implies `--constraint minangle`
    #[arg(long)]
    min_angle: Option<f64>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file (standard output when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("penalty").required(true).args(["beta", "beta_auto", "fixed_k"]))]
struct SegmentArgs {
    /// Input series
    input: PathBuf,
    #[command(flatten)]
    grid: GridArgs,
    /// Penalty per segment
    #[arg(long)]
    beta: Option<f64>,
    /// Penalty 2·σ̂²·ln n with σ̂² from the differenced Hall estimator
    #[arg(long)]
    beta_auto: bool,
    /// Fit exactly K segments without a penalty
    #[arg(long, value_name = "K")]
    fixed_k: Option<usize>,
    #[command(flatten)]
    constraint: ConstraintArgs,
    /// Pruning strategy (the fastest exact one by default)
    #[arg(long, value_enum)]
    pruning: Option<PruningArg>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VarianceArgs {
    input: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// hat:LO:HI, scenario:ID, sinusoid:AMPLITUDE:PERIOD:OFFSET or linear:S0:S1
    #[arg(long, default_value = "scenario:1")]
    signal: String,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, value_enum, default_value_t = NoiseArg::Gaussian)]
    noise: NoiseArg,
    /// Noise standard deviation
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Degrees of freedom of Student noise
    #[arg(long, default_value_t = 3.0)]
    df: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    #[arg(value_enum)]
    experiment: Experiment,
    /// Signal (see `simulate`); defaults to scenario:1 or hat:10:50
    #[arg(long)]
    signal: Option<String>,
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[command(flatten)]
    grid: GridArgs,
    /// Noise standard deviation (single-level experiments)
    #[arg(long)]
    sigma: Option<f64>,
    /// Noise levels for pruning-efficiency
    #[arg(long, value_delimiter = ',')]
    sigmas: Vec<f64>,
    /// Degrees of freedom of the Student noise in robustness
    #[arg(long, default_value_t = 3.0)]
    df: f64,
    /// Normalized penalties as start:stop:step
    #[arg(long)]
    b_grid: Option<String>,
    /// Normalized penalty for single-penalty experiments
    #[arg(long, default_value_t = 2.0)]
    b: f64,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Series lengths for timing
    #[arg(long, value_delimiter = ',')]
    n_grid: Vec<usize>,
    /// Strategies compared by pruning-efficiency
    #[arg(long, value_enum, value_delimiter = ',')]
    strategies: Vec<PruningArg>,
    /// Pruning for timing and states-density
    #[arg(long, value_enum)]
    pruning: Option<PruningArg>,
    #[command(flatten)]
    constraint: ConstraintArgs,
    /// Grid spacings for states-density
    #[arg(long, value_delimiter = ',')]
    steps: Vec<f64>,
    /// Profile for states-density (the synthetic ramp when absent)
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ProfileArgs {
    /// Profile CSV with `distance_mm,intensity` columns
    input: PathBuf,
    #[arg(long, default_value_t = 255.0)]
    beta: f64,
    /// Points at or below this distance are dropped
    #[arg(long, default_value_t = 3.5)]
    cutoff: f64,
    /// Spacing of the intensity grid
    #[arg(long, default_value_t = 1.0)]
    state_step: f64,
    #[arg(long, value_enum, default_value_t = PruningArg::Channel)]
    pruning: PruningArg,
    #[command(flatten)]
    output: OutputArgs,
}

fn configure_threads() -> CliResult<()> {
    let Some(raw) = std::env::var_os("SLOPESEG_THREADS") else {
        return Ok(());
    };
    let threads = raw
        .to_str()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&k| k > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "SLOPESEG_THREADS must be a positive integer, got {raw:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Segment(a) => commands::segment(&a),
        Command::Variance(a) => commands::variance(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Benchmark(a) => commands::benchmark(&a),
        Command::Profile(a) => commands::profile(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("slopeseg: {e}");
            e.exit_code()
        }
    }
}
