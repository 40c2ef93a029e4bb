//! Experiment runner: configuration, orchestration and report output for
//! the `pwsynth` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod registry;
pub mod report;
pub mod run;

pub use config::{Experiment, ExperimentConfig};
pub use error::CliError;
pub use report::{Check, Report, Status};
pub use run::{execute, run};
