//! Command-line front end for the `ncprob` suites.
//!
//! Exit status: 0 when every check passes, 1 when an inequality fails, 2 for usage
//! and input errors, 3 for numerical failures. Failing runs write one JSON
//! counterexample per trial.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use args::Cli;
pub use config::RunConfig;
pub use error::{CliError, Status};

/// Resolves flags against the config file and runs the command.
pub fn run(cli: &Cli) -> Result<Status, CliError> {
    let config = cli.resolve()?;
    commands::run(&config)
}

/// Published JSON schemas of the outputs.
pub mod schema {
    pub const REPORT: &str = include_str!("../schemas/report.schema.json");
    pub const SUITE: &str = include_str!("../schemas/suite.schema.json");
    pub const ROWS: &str = include_str!("../schemas/rows.schema.json");
}
