//! Library half of the `certann` command-line tool: input parsing, flag
//! validation and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;

pub use config::{Approximation, Config};
pub use error::{CliError, CliResult};
pub use ingest::Format;
