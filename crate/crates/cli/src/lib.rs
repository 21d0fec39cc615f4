//! Command-line driver for the decoupling laboratory: configuration,
//! experiment ladders, CSV/JSON reports and the self-test suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod report;
pub mod selftest;

pub use commands::{execute, Command, Outcome};
pub use config::{Flags, RunConfig};
pub use error::CliError;
