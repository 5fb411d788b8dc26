#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

mod commands;
mod config;
mod output;

use commands::CliError;

/// Heralded multi-atom entanglement toolkit.
#[derive(Debug, Parser)]
#[command(name = "herald", version)]
struct Cli {
    verb: Verb,
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// JSON result path; CSV files are written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Monte Carlo seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials; overrides the config.
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads. Results do not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Estimate the synthesis plan's success probability by Monte Carlo.
    #[arg(long)]
    verify: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Verb {
    PulseShape,
    TwoCavity,
    Dicke,
    Synthesize,
    Verify,
}

pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub verify: bool,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start {jobs} workers: {e}")))?;
    }
    if cli.trials == Some(0) {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let opts = RunOptions {
        config: cli.config,
        out: cli.out,
        seed: cli.seed,
        trials: cli.trials,
        verify: cli.verify,
    };
    match cli.verb {
        Verb::PulseShape => commands::pulse_shape(&opts),
        Verb::TwoCavity => commands::two_cavity(&opts),
        Verb::Dicke => commands::dicke(&opts),
        Verb::Synthesize => commands::synthesize(&opts),
        Verb::Verify => commands::synthesize(&RunOptions { verify: true, ..opts }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("herald: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
