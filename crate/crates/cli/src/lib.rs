//! Command-line front end: configuration, dispatch and tabular output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
mod verify;

pub use commands::{dispatch, Report, Subcommand};
pub use config::{emit_config, parse_config, Format, RunConfig};
pub use error::CliError;
