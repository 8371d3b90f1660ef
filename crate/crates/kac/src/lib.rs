//! Experiment driver for the `kac` command-line tool.

pub mod commands;
pub mod config;
pub mod exec;
pub mod output;
pub mod svg;

use std::fmt;
use std::io;

pub use commands::run;
pub use config::{Command, RunConfig, UsageError};

/// A failed run, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, configuration or files (1).
    Usage(String),
    /// The energy or its parameters fail validation (2).
    Validation(String),
    /// A solver did not converge or reach its tolerance (3).
    Numeric(String),
    /// A statistical acceptance test failed; outputs were still written (4).
    Statistical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Statistical(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Numeric(m) => write!(f, "numerical failure: {m}"),
            CliError::Statistical(m) => write!(f, "statistical test failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<kac_core::Error> for CliError {
    fn from(e: kac_core::Error) -> Self {
        use kac_core::Error::*;
        let msg = e.to_string();
        match e {
            Domain(_) | Contract(_) | Conditions(_) => CliError::Validation(msg),
            Refused(_) => CliError::Statistical(msg),
            Numeric { .. } | Bracket(_) | Truncation(_) | Accuracy { .. } | DegenerateSaddle(_) | Stability { .. } => {
                CliError::Numeric(msg)
            }
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Usage(format!("I/O: {e}"))
    }
}

impl From<UsageError> for CliError {
    fn from(e: UsageError) -> Self {
        CliError::Usage(e.0)
    }
}
