//! `ssinfer` command-line front end.
//!
//! Exit status is 0 on success, 1 when the data or an estimation step is
//! rejected, and 2 on a usage error. `SSINFER_THREADS` sets the worker pool
//! size (0 or unset means one worker per core).

mod commands;
mod config;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use ssinfer_sim::ModelVariant;

use config::Overrides;

#[derive(Debug, Parser)]
#[command(name = "ssinfer", version, about = "Semi-supervised inference for means, variances and treatment effects")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Inputs {
    /// Labeled CSV with a header row.
    #[arg(long)]
    labeled: PathBuf,
    /// Unlabeled CSV with a header row.
    #[arg(long)]
    unlabeled: PathBuf,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean of the response (labeled columns: y, x...; unlabeled: x...).
    Mean(Inputs),
    /// Variance of the response (same layout as `mean`).
    Variance(Inputs),
    /// Average treatment effect (labeled: y, d, x...; unlabeled: d, x...).
    Ate(Inputs),
    /// Treatment effect size (same layout as `ate`).
    Tes(Inputs),
    /// Monte Carlo study of one reference model.
    Simulate(commands::SimulateArgs),
    /// Proportionality ratio over a grid of nonlinearity levels.
    RStudy(commands::RStudyArgs),
}

fn parse_model(s: &str) -> std::result::Result<ModelVariant, String> {
    s.parse().map_err(|e: ssinfer_sim::SimError| e.to_string())
}

fn init_threads() -> Result<()> {
    let Ok(raw) = std::env::var("SSINFER_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("SSINFER_THREADS must be a non-negative integer, got {raw:?}"))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Mean(a) => commands::mean(&a.labeled, &a.unlabeled, a.output.as_deref(), &a.overrides),
        Command::Variance(a) => commands::variance(&a.labeled, &a.unlabeled, a.output.as_deref(), &a.overrides),
        Command::Ate(a) => commands::ate(&a.labeled, &a.unlabeled, a.output.as_deref(), &a.overrides),
        Command::Tes(a) => commands::tes(&a.labeled, &a.unlabeled, a.output.as_deref(), &a.overrides),
        Command::Simulate(a) => commands::simulate(&a),
        Command::RStudy(a) => {
            if !a.model.is_example() {
                bail!("r-study needs an example model (ex1 or ex2), got {}", a.model);
            }
            commands::r_study(&a)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
