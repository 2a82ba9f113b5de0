use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("OPSIM_LOG", "warn")).init();
    opsim::cli::execute(opsim::cli::Cli::parse())
}
