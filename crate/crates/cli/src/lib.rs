//! Experiment runner behind the `active-labeling` binary.

pub mod commands;
pub mod config;
pub mod experiment;

use std::fmt;

/// Failure classes, each with its own exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad configuration or arguments (exit 1).
    Validation(String),
    /// Failure while running (exit 2).
    Runtime(String),
    /// A verification check failed (exit 3).
    Acceptance(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Acceptance(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid configuration: {m}"),
            CliError::Runtime(m) => write!(f, "{m}"),
            CliError::Acceptance(m) => write!(f, "check failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<active_labeling::Error> for CliError {
    fn from(e: active_labeling::Error) -> Self {
        use active_labeling::Error as E;
        match e {
            E::InvalidDimension(_)
            | E::InvalidScale(_)
            | E::InvalidParameter(_)
            | E::MissingParameter(_)
            | E::TrivialSet { .. }
            | E::Unsupported(_)
            | E::UnsupportedQuery(_) => CliError::Validation(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}
