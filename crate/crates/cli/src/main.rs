//! `floydlab`: run trajectory-level quantum scenarios from flat config
//! files and emit deterministic CSV tables and JSON reports.
//!
//! Exit status: 0 when the computation ran and every built-in identity
//! check passed, 1 when a check exceeded its tolerance, 2 for configuration
//! or evaluation errors.

mod config;
mod report;
mod tasks;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tasks::{FormatChoice, Invocation, Verb};

#[derive(Parser)]
#[command(
    name = "floydlab",
    version,
    about = "Trajectory-level quantum mechanics at fixed energy",
    long_about = "Evaluates equation-of-motion trajectories, cycle statistics, \
correspondence-limit sweeps, and square-well timing from flat scenario files, \
with built-in identity checks and bit-stable CSV/JSON output."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory for CSV/JSON files (env FLOYDLAB_OUT overrides).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Emit only one format instead of both.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,

    /// Multiply every identity-check tolerance by this factor.
    #[arg(long, global = true, default_value_t = 1.0)]
    tol_scale: f64,

    /// Worker threads for sweep execution (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for the randomized identity-suite draws.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the computation the scenario's output.kind asks for.
    Run { config: PathBuf },
    /// Run only the identity suite against the scenario's potential.
    Check { config: PathBuf },
    /// Run the scenario's sweep section across a worker pool.
    Sweep { config: PathBuf },
    /// Tabulate the even bound levels of the scenario's square well.
    Levels { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (verb, config) = match cli.command {
        Command::Run { config } => (Verb::Run, config),
        Command::Check { config } => (Verb::Check, config),
        Command::Sweep { config } => (Verb::Sweep, config),
        Command::Levels { config } => (Verb::Levels, config),
    };
    let out_dir = std::env::var_os("FLOYDLAB_OUT").map(PathBuf::from).unwrap_or(cli.out);
    let invocation = Invocation {
        verb,
        config,
        out_dir,
        format: match cli.format {
            None => FormatChoice::Both,
            Some(FormatArg::Csv) => FormatChoice::Csv,
            Some(FormatArg::Json) => FormatChoice::Json,
        },
        tol_scale: cli.tol_scale,
        threads: cli.threads,
        seed: cli.seed,
    };
    match tasks::execute(&invocation) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("floydlab: identity checks failed");
            ExitCode::from(1)
        }
        Err(error) => {
            eprintln!("floydlab: error: {error:#}");
            ExitCode::from(2)
        }
    }
}
