//! Command-line front end for `taxruin-core`.
//!
//! [`config::parse_config`] merges flags with an optional `key = value`
//! file, [`run::run`] dispatches the subcommand and writes CSV or JSON.

pub mod config;
pub mod output;
pub mod run;
pub mod selftest;

use taxruin_core::RuinError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] RuinError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 1 for bad input, 2 for numerical or regime failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Model(e) if e.is_parameter_error() => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
