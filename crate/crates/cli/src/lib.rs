//! Experiment orchestration for the `zenodrive` binary: configuration,
//! sweeps over the core library and CSV output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use error::{CliError, CliResult};
