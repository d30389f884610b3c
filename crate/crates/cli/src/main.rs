//! `mut2wait`: evaluate, sample and verify the waiting time to a second mutation.
//!
//! Exit codes: 0 success (or comparison passed), 1 numeric failure or failed
//! comparison, 2 usage error, 3 comparison without a closed-form reference.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mut2wait_core::Error;

pub const THREADS_ENV: &str = "MUT2WAIT_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mut2wait", version, about, allow_negative_numbers = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate survival, cdf, density and the small-time approximation.
    Eval(EvalArgs),
    /// Draw waiting times and write them one per line, with a JSON summary.
    Sample(SampleArgs),
    /// Compare simulated draws with the closed-form law (KS distance vs DKW bound).
    Compare(CompareArgs),
    /// Sup-norm gaps between the exact law and a large-N limit law.
    Limits(LimitsArgs),
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Type-1 mutation rate.
    #[arg(long, allow_negative_numbers = true)]
    pub mu1: f64,
    /// Type-2 mutation rate.
    #[arg(long, allow_negative_numbers = true)]
    pub mu2: f64,
    /// Rate multiplier N (Moran population size for --model moran).
    #[arg(long, allow_negative_numbers = true)]
    pub n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Paper,
    Moran,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    FixedRatio,
    FastSecond,
    Quadratic,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub t_max: f64,
    #[arg(long)]
    pub points: usize,
    /// Geometric spacing from --t-min to --t-max (needs --t-min > 0).
    #[arg(long)]
    pub log_grid: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    /// Number of draws.
    #[arg(long)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModelArg::Paper)]
    pub model: ModelArg,
    /// Moran censoring horizon.
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    /// File receiving one draw per line.
    #[arg(long)]
    pub output: PathBuf,
    /// File receiving the JSON summary (stdout when omitted).
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = ModelArg::Paper)]
    pub model: ModelArg,
    /// DKW confidence parameter.
    #[arg(long, default_value_t = 1e-3, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    /// Report file (stdout when omitted).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LimitsArgs {
    #[arg(long, value_enum)]
    pub regime: RegimeArg,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Comma-separated increasing N values.
    #[arg(long, value_delimiter = ',', default_values_t = [1e2, 1e4, 1e6], allow_negative_numbers = true)]
    pub n_values: Vec<f64>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// An error carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { code: 1, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::InvalidTime(_)
            | Error::InvalidProbability(_)
            | Error::InvalidGrid(_) => 2,
            Error::NoReference(_) => 3,
            _ => 1,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::numeric(format!("i/o error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
