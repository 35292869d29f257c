//! Configuration parsing, subcommands and output formatting for the
//! `topovqe` binary.

pub mod commands;
pub mod config;
pub mod format;

pub use commands::{cmd_exact, cmd_spectrum, cmd_sweep, CliError, Common};
pub use config::{ConfigError, RunConfig};
