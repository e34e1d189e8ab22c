use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value or file is invalid.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data does not match what the operation expects.
    #[error("invalid data: {0}")]
    Data(String),

    #[error("observation for frame {got} does not match filter frame {expected}")]
    FrameMismatch { expected: i64, got: i64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    /// Process exit code: 1 for configuration problems, 2 for data problems.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse { .. } => 1,
            Error::Io { .. } => 1,
            Error::Data(_) | Error::FrameMismatch { .. } | Error::Wav { .. } => 2,
        }
    }
}
