//! `survfuse` command-line interface.
//!
//! Exit codes: 2 for configuration errors, 3 for data errors, 4 for
//! numerical failures.

mod commands;
mod config;
mod model_file;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<survfuse::Error> for CliError {
    fn from(e: survfuse::Error) -> Self {
        use survfuse::Error as E;
        match e {
            E::Schema(_) | E::InvalidArgument(_) => CliError::Config(e.to_string()),
            E::Numerical(_) | E::ZeroVariance => CliError::Numerical(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "survfuse", version, about = "Survival trees with leaf fusion and bias-corrected group inference")]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grow, fuse and select a tree; write the model and its reports.
    Fit(FitArgs),
    /// Assign rows of a CSV file to the groups of a saved model.
    Predict(PredictArgs),
    /// Print a saved model, optionally with group statistics on data.
    Summarize(SummarizeArgs),
    /// Run a simulation study and write its report CSVs.
    Simulate(SimulateArgs),
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Flat `key = value` configuration file.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Validation data for `selection = test`.
    #[arg(long)]
    pub test_input: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// `cv[:V]`, `aic`, `bic` or `test`.
    #[arg(long)]
    pub selection: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bootstrap replicates for the bias correction (0 disables it).
    #[arg(long)]
    pub bootstrap: Option<usize>,
    /// `iv` or `plain`.
    #[arg(long)]
    pub split_mode: Option<String>,
    /// Any configuration key, as `key=value`; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// A `model.json` written by `fit`.
    #[arg(long, short)]
    pub model: PathBuf,
    #[arg(long)]
    pub input: PathBuf,
    /// Output CSV (default: standard output).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SummarizeArgs {
    #[arg(long, short)]
    pub model: PathBuf,
    /// Data with outcome columns for per-group counts and medians.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// `comparison`, `bias`, `cutoff` or `selection`.
    #[arg(long, default_value = "comparison")]
    pub study: String,
    /// Model tags or names, comma separated (comparison and bias studies).
    #[arg(long, default_value = "C")]
    pub models: String,
    #[arg(long)]
    pub replicates: Option<usize>,
    /// Training sample size.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub censoring: f64,
    /// Selection criterion of the comparison study.
    #[arg(long, default_value = "cv:10")]
    pub selection: String,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, short, default_value = ".")]
    pub output: PathBuf,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Fit(a) => commands::fit(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Summarize(a) => commands::summarize(&a),
        Command::Simulate(a) => commands::simulate(&a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("survfuse: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
