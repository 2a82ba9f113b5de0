//! File formats, result output and the command line for `opsim-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod input;
pub mod results;
pub mod run;
pub mod storage;

pub use config::SimulationConfig;
pub use error::{Error, Result};
pub use input::load_system;
pub use results::{load_results, Results};
pub use run::{run_config, validate_config, RunSummary};
