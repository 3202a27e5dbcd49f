//! Error type shared across the library and the CLI.

use thiserror::Error;

/// Errors produced by waveform construction, detection, search, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or configuration value is invalid or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A requested computation exceeds a resource budget (e.g. trellis or
    /// search size). `required` is what the request needs, `budget` the cap.
    #[error("capacity exceeded: requires {required}, budget is {budget}")]
    Capacity { required: u64, budget: u64 },

    /// Input data (signal lengths, sequence contents, file contents) is
    /// malformed for the requested operation.
    #[error("invalid input: {0}")]
    Input(String),

    /// Reading or writing a file failed.
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code used by the CLI for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Input(_) => 2,
            Error::Capacity { .. } => 3,
            Error::Io { .. } => 4,
        }
    }

    /// Convenience constructor for configuration errors.
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Convenience constructor for input errors.
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Convenience constructor wrapping an I/O error with its path.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
