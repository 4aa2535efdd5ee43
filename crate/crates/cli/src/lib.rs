//! Config parsing, result bundles and the subcommands behind the `qzda` binary.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod error;

pub use error::CliError;
