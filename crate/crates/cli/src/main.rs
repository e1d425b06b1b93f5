//! `rosd`: simulate review streams, detect spam, inject attackers, evaluate runs.
//!
//! Exit codes: 0 success, 1 usage or config, 2 I/O, 3 data integrity.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rosd_core::{AttackKind, Format};

#[derive(Debug, Parser)]
#[command(
    name = "rosd",
    version,
    about = "Opinion-spam detection over reviewer/review/product graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labeled review dataset from a preset or scenario config.
    Simulate(SimulateArgs),
    /// Solve trust / honesty / reliability for a dataset.
    Detect(DetectArgs),
    /// Append a scripted attacker to an existing dataset.
    Inject(InjectArgs),
    /// Compare a score export against the dataset's labels.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in scenario name.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub preset: Option<String>,
    /// Scenario config file (JSON).
    #[arg(short = 'c', long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long, env = "ROSD_SEED")]
    pub seed: Option<u64>,
    /// Dataset output path; with --dump-preset, the config output path.
    #[arg(short = 'o', long)]
    pub out: PathBuf,
    /// Write the resolved scenario config instead of running it.
    #[arg(long)]
    pub dump_preset: bool,
    /// Output format; defaults to the output path's extension.
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    /// Score export path (`.csv` or JSONL).
    #[arg(short = 'o', long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = rosd_core::engine::DEFAULT_TOLERANCE)]
    pub tolerance: f64,
    #[arg(long = "max-iters", default_value_t = rosd_core::engine::DEFAULT_MAX_ITERATIONS)]
    pub max_iters: u32,
    /// Initial value for every score.
    #[arg(long, default_value_t = 0.5)]
    pub init: f64,
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    #[arg(long, value_parser = parse_kind)]
    pub kind: AttackKind,
    /// Comma-separated product ids.
    #[arg(long, value_delimiter = ',', required = true)]
    pub targets: Vec<String>,
    /// Attack score on the raw 0–5 scale.
    #[arg(long)]
    pub score: f64,
    #[arg(short = 'n', long = "n-reviews", default_value_t = 20)]
    pub n: u32,
    #[arg(long, default_value_t = 1)]
    pub block_length: u32,
    #[arg(long)]
    pub honest_elsewhere: bool,
    #[arg(long, env = "ROSD_SEED", default_value_t = rosd_core::presets::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(short = 'o', long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(short = 'i', long)]
    pub input: PathBuf,
    /// Score export from `detect`.
    #[arg(short = 's', long)]
    pub scores: PathBuf,
    /// JSON report path; the text table goes beside it with a `.txt` extension.
    #[arg(short = 'o', long)]
    pub out: PathBuf,
    /// Also report detection quality at this honesty / trust threshold.
    #[arg(long)]
    pub threshold: Option<f64>,
}

fn parse_kind(s: &str) -> Result<AttackKind, String> {
    match s.replace('-', "_").as_str() {
        "simple" => Ok(AttackKind::Simple),
        "over_product" => Ok(AttackKind::OverProduct),
        "over_time" => Ok(AttackKind::OverTime),
        _ => Err(format!(
            "unknown attack kind `{s}` (simple, over_product, over_time)"
        )),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Detect(a) => commands::detect(&a),
        Command::Inject(a) => commands::inject(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code as u8)
        }
    }
}
