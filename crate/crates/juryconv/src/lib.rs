//! Std companion to `juryconv-core`: JSON/CSV formats, parallel experiment
//! suites with machine-readable reports, and the `juryconv` command line.

pub mod cli;
pub mod format;
pub mod report;
pub mod runner;
pub mod suites;

pub use juryconv_core;

use format::FormatError;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Core(#[from] juryconv_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl AppError {
    pub fn usage(message: impl Into<String>) -> Self {
        AppError::Usage(message.into())
    }
}

pub type AppResult<T> = Result<T, AppError>;

/// Exit statuses of the command line.
pub mod exit {
    pub const OK: u8 = 0;
    pub const EXPECTATION_VIOLATED: u8 = 1;
    pub const USAGE: u8 = 2;
}
