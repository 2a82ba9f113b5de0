use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opsim_core::engine::SimulationStatus;

use crate::config::SimulationConfig;
use crate::error::Error;
use crate::results;
use crate::run::{run_config, validate_config};

#[derive(Debug, Parser)]
#[command(name = "opsim", version, about = "Quasi-static power system operations simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a configuration and its system without solving anything.
    Validate { config: PathBuf },
    /// Build and execute a simulation.
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `output` or `./output`.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write one stored result to CSV.
    Export {
        output_dir: PathBuf,
        #[arg(long)]
        model: String,
        /// `ActivePower`, or `kind/name` such as `parameter/EnergyTarget`.
        #[arg(long)]
        name: String,
        /// Include look-ahead rows, not just the realized ones.
        #[arg(long)]
        lookahead: bool,
        #[arg(long)]
        to: PathBuf,
    },
}

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_RUNTIME: u8 = 2;

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME })
}

pub fn execute(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Validate { config } => {
            let report = SimulationConfig::load(&config).and_then(|c| validate_config(&c));
            match report {
                Ok(r) => {
                    for (m, n) in &r.executions {
                        println!("{m}: {n} executions");
                    }
                    for w in &r.warnings {
                        println!("warning: {w}");
                    }
                    println!("ok");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Run { config, output } => {
            let cfg = match SimulationConfig::load(&config) {
                Ok(c) => c,
                Err(e) => return fail(&e),
            };
            let out = output.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("output"));
            match run_config(&cfg, &out) {
                Ok(s) if s.status == SimulationStatus::Finished => {
                    for (m, n) in &s.executions {
                        println!("{m}: {n} executions");
                    }
                    println!("results in {}", s.output.display());
                    ExitCode::SUCCESS
                }
                Ok(s) => {
                    eprintln!("simulation failed: {}", s.error.as_deref().unwrap_or("unknown error"));
                    eprintln!("partial results and diagnostics in {}", s.output.display());
                    ExitCode::from(EXIT_RUNTIME)
                }
                Err(e) => fail(&e),
            }
        }
        Command::Export { output_dir, model, name, lookahead, to } => {
            match results::export(&output_dir, &model, &name, lookahead, &to) {
                Ok(n) => {
                    println!("wrote {n} rows to {}", to.display());
                    ExitCode::SUCCESS
                }
                // a missing or unreadable store is a problem with the arguments
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_VALIDATION)
                }
            }
        }
    }
}
