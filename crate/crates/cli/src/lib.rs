//! Configuration, commands and file formats behind the `rpsflow` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{Format, InitSpec, OutputSpec, RunArgs, RunConfig, SweepSpec};
pub use error::{CliError, Result};
