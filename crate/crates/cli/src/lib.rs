//! Command-line front end for `wml-core`: classification, spectra, Monte
//! Carlo and the example tables, each printed as a versioned JSON report.
//!
//! Exit codes: 0 ok, 1 numeric failure, 2 usage or validation error,
//! 3 every verdict inconclusive, 4 a reproduced cell does not match.

pub mod commands;
pub mod report;
pub mod reproduce;

pub use commands::{run, Cli, CliError, Command, Outcome, Status};
pub use report::{ManifoldEcho, Report, SCHEMA_VERSION, TOOL_VERSION};

/// Worker count requested through `WML_THREADS`, if any.
pub fn threads_from_env(value: Option<&str>) -> Result<Option<usize>, CliError> {
    match value {
        None => Ok(None),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Usage(format!(
                "WML_THREADS must be a positive integer, got `{s}`"
            ))),
        },
    }
}
