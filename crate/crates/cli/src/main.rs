//! `rpst`: permutation-event entropy, step-length distributions, random
//! vector steps and random walks from the command line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::FileConfig;

pub const OUT_DIR_ENV: &str = "RPST_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "rpst", version, about = "Random permutation set random walks")]
struct Cli {
    /// JSON file with default parameter values; flags override it.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Write a run manifest (command line, parameters, outputs, timing) here.
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropy of a mass function file, or the maximum-entropy table.
    Entropy(EntropyArgs),
    /// Step-length distribution table.
    Dist(DistArgs),
    /// Sample random vector steps.
    Rvg(RvgArgs),
    /// Exhaustive step support and exact moments for small n.
    RvgEnum(RvgEnumArgs),
    /// Generate walks, one CSV per path.
    Walk(WalkArgs),
    /// Run a verification suite and print a JSON report.
    Verify(VerifyArgs),
    /// Render a CSV as SVG.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Path,
    Hist,
    Series,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Mass function JSON: {"n": 2, "masses": [{"event": [1], "mass": 0.5}, ...]}.
    pub pmf_file: Option<PathBuf>,
    #[arg(long)]
    pub base: Option<f64>,
    /// Print the maximum entropy for every n in 1..=MAX_N.
    #[arg(long, value_name = "MAX_N")]
    pub max_n: Option<u32>,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long, value_parser = parse_kind)]
    pub kind: Option<rpst_walk::length_dist::DistKind>,
    #[arg(long)]
    pub max_len: Option<u32>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RvgArgs {
    /// Number of directions.
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RvgEnumArgs {
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: TableFormat,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[arg(long)]
    pub steps: Option<u32>,
    #[arg(long)]
    pub max_len: Option<u32>,
    #[arg(long, value_parser = parse_kind)]
    pub dist: Option<rpst_walk::length_dist::DistKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub scaled: bool,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; output does not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = parse_suite)]
    pub suite: rpst_walk::verify::Suite,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub paths: Option<usize>,
    #[arg(long)]
    pub steps: Option<u32>,
    #[arg(long)]
    pub max_len: Option<u32>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, value_parser = parse_kind)]
    pub dist: Option<rpst_walk::length_dist::DistKind>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: ReportFormat,
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kind: PlotKind,
    /// Defaults to the input name with an `.svg` extension under the output directory.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Column for `hist`; defaults to the first column.
    #[arg(long)]
    pub column: Option<String>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub title: Option<String>,
    #[arg(long, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<rpst_walk::length_dist::DistKind, String> {
    s.parse().map_err(|e: rpst_walk::Error| e.to_string())
}

fn parse_suite(s: &str) -> Result<rpst_walk::verify::Suite, String> {
    s.parse().map_err(|e: rpst_walk::Error| e.to_string())
}

/// Verification ran but at least one check failed.
#[derive(Debug)]
pub struct VerificationFailed;

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for VerificationFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return 1;
    }
    match err
        .chain()
        .find_map(|e| e.downcast_ref::<rpst_walk::Error>())
    {
        Some(rpst_walk::Error::Capacity(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = std::time::Instant::now();
    let result = FileConfig::load(cli.config.as_deref())
        .and_then(|file| commands::run(&cli.command, &file))
        .and_then(|outcome| {
            if let Some(path) = &cli.manifest {
                commands::write_manifest(path, &outcome, started.elapsed())?;
            }
            if outcome.verification_failed {
                Err(VerificationFailed.into())
            } else {
                Ok(())
            }
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if err.downcast_ref::<VerificationFailed>().is_none() {
                eprintln!("error: {err:#}");
            }
            ExitCode::from(exit_code(&err))
        }
    }
}
