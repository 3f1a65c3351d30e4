//! Command-line front end: CSV ingestion and one subcommand per analysis,
//! each producing a JSON report or a CSV table.

pub mod commands;
pub mod error;
pub mod io;

pub use commands::{run, Cli, Command};
pub use error::CliError;
