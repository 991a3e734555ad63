//! The `qgraph` command-line front end: config parsing, CSV tables, the
//! subcommands and SVG charts.

pub mod commands;
pub mod config;
pub mod csvio;
pub mod plot;
pub mod validate;

pub use commands::{main_with_args, Cli, Command};
pub use config::ExperimentConfig;
