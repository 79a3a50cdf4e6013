//! `sem` — stochastic encounter-mating workbench.
//!
//! Exit codes: 0 success (and all verification checks passed), 1 verification
//! checks failed, 2 configuration error, 3 runtime error.

mod commands;
mod config;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::CommonArgs;

#[derive(Parser)]
#[command(
    name = "sem",
    about = "Simulate, solve, classify, and verify the stochastic encounter-mating model",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the stochastic simulator and report per-run summaries.
    Simulate {
        #[command(flatten)]
        args: CommonArgs,
        /// Aggregate runs into an empirical terminal-pattern pmf.
        #[arg(long)]
        empirical_pmf: bool,
    },
    /// Closed-form terminal and time-t laws.
    Exact {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Generator/kernel dumps, transient solves, terminal expectations.
    Dynamics {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Fine-balance report, decomposition, and the 2x2 trichotomy.
    Classify {
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Cross-check simulation, lattice, recursion, and oracle.
    Verify {
        #[command(flatten)]
        args: CommonArgs,
    },
}

fn execute(
    args: &CommonArgs,
    run: impl FnOnce(&config::Experiment) -> Result<(output::Document, bool), sem_core::SemError>,
) -> ExitCode {
    let experiment = match config::load_experiment(args) {
        Ok(exp) => exp,
        Err(message) => {
            eprintln!("configuration error: {message}");
            return ExitCode::from(2);
        }
    };
    match run(&experiment) {
        Ok((doc, all_passed)) => {
            if let Err(e) = output::emit(&doc, experiment.format, experiment.out.as_deref()) {
                eprintln!("output error: {e}");
                return ExitCode::from(3);
            }
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Simulate { args, empirical_pmf } => execute(&args, |exp| {
            commands::simulate::run(exp, empirical_pmf).map(|d| (d, true))
        }),
        Command::Exact { args } => {
            execute(&args, |exp| commands::exact::run(exp).map(|d| (d, true)))
        }
        Command::Dynamics { args } => {
            execute(&args, |exp| commands::dynamics::run(exp).map(|d| (d, true)))
        }
        Command::Classify { args } => {
            execute(&args, |exp| commands::classify::run(exp).map(|d| (d, true)))
        }
        Command::Verify { args } => execute(&args, commands::verify::run),
    }
}
