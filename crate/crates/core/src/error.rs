use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid mode {0}, expected 1, 2 or 3")]
    InvalidMode(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("rank deficiency: requested rank {requested}, numerical rank {numerical}")]
    RankDeficient { requested: usize, numerical: usize },

    #[error("too few snapshots: need at least {needed}, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Coarse category used by front ends to pick exit codes.
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Format(_) | Error::Io(_) => ErrorCategory::DataFormat,
            Error::InvalidArgument(_) | Error::InvalidMode(_) => ErrorCategory::Usage,
            Error::DimensionMismatch(_) | Error::TooFewSnapshots { .. } => ErrorCategory::DataFormat,
            Error::Degenerate(_) | Error::RankDeficient { .. } | Error::Numerical(_) => {
                ErrorCategory::Numerical
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    DataFormat,
    Numerical,
}

pub type Result<T> = std::result::Result<T, Error>;
