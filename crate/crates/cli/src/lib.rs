//! Command-line harness for `tailmean`: configuration, CSV ingestion,
//! experiment orchestration and report files.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod experiment;
pub mod ingest;
pub mod report;

pub use cli::{run, Cli, Command, RunArgs};
pub use config::{ConfigLayer, RunConfig};
pub use error::{CliError, CliResult};
