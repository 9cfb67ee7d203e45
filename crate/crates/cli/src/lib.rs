//! Command-line front end for `gurarii-core`: spaces and maps as JSON files,
//! constructions that emit verifiable traces, and SVG drawings of planar
//! unit balls.

pub mod cli;
pub mod commands;
pub mod files;
pub mod render;
pub mod report;

use std::path::PathBuf;

use gurarii_core::Error;
use thiserror::Error as ThisError;

pub use cli::{Cli, Command};
pub use commands::run;
pub use report::RunReport;

/// Exit status when every check passes.
pub const EXIT_PASS: i32 = 0;
/// Exit status when a certificate or invariant fails.
pub const EXIT_FAIL: i32 = 1;
/// Exit status for unreadable, malformed or unsuitable input.
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, ThisError)]
pub enum CliError {
    #[error("{}{}: {message}", path.display(), position.map(|(l, c)| format!(":{l}:{c}")).unwrap_or_default())]
    Input {
        path: PathBuf,
        message: String,
        position: Option<(usize, usize)>,
    },
    #[error("cannot write {}: {message}", path.display())]
    Output { path: PathBuf, message: String },
    #[error("{0}")]
    Rejected(String),
    #[error(transparent)]
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(_) => EXIT_FAIL,
            _ => EXIT_INPUT,
        }
    }
}

impl From<Error> for CliError {
    /// Errors caused by the inputs or flags are rejections; everything else
    /// is a failed certificate.
    fn from(e: Error) -> Self {
        match e {
            Error::EpsilonTooSmall { .. }
            | Error::NotInjective
            | Error::DimensionMismatch { .. }
            | Error::DependentBasis
            | Error::SpaceMismatch
            | Error::InvalidSchedule(_)
            | Error::InvalidArgument(_)
            | Error::ChainExhausted { .. } => CliError::Rejected(e.to_string()),
            other => CliError::Core(other),
        }
    }
}
