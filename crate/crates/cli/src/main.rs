//! `elastic-rays`: experiment driver for elastic ray geometry, transverse
//! ray transforms, and linearized density inversion on a ball domain.
//!
//! One JSON config drives every subcommand; `--out`, `--mode`, and `--seed`
//! override single fields. Exit codes: 0 success, 1 validation failure
//! (a hypothesis check or data consistency check failed), 2 config or I/O
//! error. Outputs are deterministic: identical config and seed give
//! byte-identical files.

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "elastic-rays", version, about = "Elastic ray experiments: hypothesis checks, geodesic tracing, transverse ray transforms, density inversion")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the wave mode for check/trace.
    #[arg(long, value_parser = ["P", "S"])]
    mode: Option<String>,
    /// Override the chord-fan seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify model hypotheses: positivity, convexity, foliation, ray lengths.
    Check(RunArgs),
    /// Trace the chord fan and write paths.csv plus a summary.
    Trace(RunArgs),
    /// Synthesize the transverse dataset for the configured perturbation.
    Forward(RunArgs),
    /// Recover the density perturbation from the dataset in the output dir.
    Invert(RunArgs),
    /// Aggregate invert summaries into a CSV table.
    Report {
        /// Output CSV path.
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
        /// invert_summary.json files to aggregate.
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool, config::Failure> {
    match cli.cmd {
        Cmd::Check(a) => {
            let exp = load(&a)?;
            commands::cmd_check(&exp)
        }
        Cmd::Trace(a) => {
            let exp = load(&a)?;
            commands::cmd_trace(&exp).map(|_| true)
        }
        Cmd::Forward(a) => {
            let exp = load(&a)?;
            commands::cmd_forward(&exp).map(|_| true)
        }
        Cmd::Invert(a) => {
            let exp = load(&a)?;
            commands::cmd_invert(&exp).map(|_| true)
        }
        Cmd::Report { out, summaries } => commands::cmd_report(&out, &summaries).map(|_| true),
    }
}

fn load(a: &RunArgs) -> Result<config::Experiment, config::Failure> {
    config::load(&a.config, a.out.as_deref(), a.mode.as_deref(), a.seed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: hypothesis checks failed");
            ExitCode::from(1)
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code() as u8)
        }
    }
}
