//! Command-line front end: estimate embeddings, tune SVR hyperparameters
//! with the golden sine algorithm or a baseline, compare optimizers, and
//! re-validate stored reports.
//!
//! Machine-readable results go to stdout and report files; diagnostics
//! and per-iteration progress go to stderr. Exit codes: 0 success,
//! 1 usage error, 2 data error, 3 computation error.

mod config;
mod run;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_COMPUTE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "gsvr",
    version,
    about = "Tune epsilon-SVR hyperparameters with the golden sine algorithm and forecast time series one step ahead"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate or echo the phase-space embedding for a quote series
    Embed(CommonArgs),
    /// Tune (C, gamma, epsilon), train, forecast the test split, write a report
    Tune(CommonArgs),
    /// Run several optimizers on one series and compare them pairwise
    Compare(CommonArgs),
    /// Recompute a stored report's error metrics and verify them
    Validate(ValidateArgs),
}

/// Flags shared by embed/tune/compare. Every unset flag falls back to
/// the config file, then to the built-in default.
#[derive(Args, Debug, Default, Clone)]
struct CommonArgs {
    /// Input quote CSV with header Date,Open,High,Low,Close,Adj Close,Volume
    #[arg(long)]
    input: Option<PathBuf>,

    /// Output path for the report or dataset [default: <input stem>-<kind>.json]
    #[arg(long)]
    output: Option<PathBuf>,

    /// RNG seed, or 'random' for entropy [default: 42]
    #[arg(long)]
    seed: Option<String>,

    /// Embedding dimension m [default: estimated by false nearest neighbors]
    #[arg(long)]
    m: Option<usize>,

    /// Embedding delay tau [default: estimated by the first AMI minimum]
    #[arg(long)]
    tau: Option<usize>,

    /// Search agents [default: 20]
    #[arg(long)]
    population: Option<usize>,

    /// Optimizer iterations [default: 50]
    #[arg(long)]
    iterations: Option<usize>,

    /// Tuner for `tune` [default: golden_sine]
    #[arg(long)]
    optimizer: Option<String>,

    /// Comma-separated tuner list for `compare`
    /// [default: golden_sine,random_search,particle_swarm,grey_wolf]
    #[arg(long)]
    optimizers: Option<String>,

    /// C search bounds as LO:HI [default: 6.103515625e-5:256]
    #[arg(long, value_name = "LO:HI")]
    bounds_c: Option<String>,

    /// gamma search bounds as LO:HI [default: 6.103515625e-5:256]
    #[arg(long, value_name = "LO:HI")]
    bounds_gamma: Option<String>,

    /// epsilon search bounds as LO:HI [default: 6.103515625e-5:0.25]
    #[arg(long, value_name = "LO:HI")]
    bounds_epsilon: Option<String>,

    /// Chronological train fraction [default: 0.8]
    #[arg(long)]
    split: Option<f64>,

    /// Partition the tuning fitness scores: test_set or validation_split
    /// [default: test_set]
    #[arg(long)]
    fitness_target: Option<String>,

    /// Scale with full-series min/max instead of train-only statistics
    /// (see also the library's ScalingMode)
    #[arg(long)]
    paper_faithful_scaling: bool,

    /// Price column: close or adj_close [default: close]
    #[arg(long)]
    column: Option<String>,

    /// Worker threads for comparisons and fitness evaluation [default: 1]
    #[arg(long)]
    jobs: Option<usize>,

    /// Key=value config file supplying any of the above keys
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Report JSON produced by `tune`
    #[arg(long)]
    report: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = match cli.command {
        Command::Embed(args) => run::embed(args),
        Command::Tune(args) => run::tune(args),
        Command::Compare(args) => run::compare(args),
        Command::Validate(args) => run::validate(&args.report),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(error: &run::CliError) -> u8 {
    use gsvr_core::Error;
    match error {
        run::CliError::Usage(_) => EXIT_USAGE,
        run::CliError::Core(e) => match e {
            Error::QuoteData(_) | Error::Io(_) | Error::Json(_) | Error::InvalidInput(_) => {
                EXIT_DATA
            }
            Error::NoConvergence { .. }
            | Error::NonFiniteObjective { .. }
            | Error::Estimation(_)
            | Error::Scaling(_)
            | Error::DegenerateComparison(_)
            | Error::Report(_) => EXIT_COMPUTE,
        },
    }
}
