use thiserror::Error;

/// Errors produced by the model, simulator, analysis and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("out of bounds: {0}")]
    OutOfBounds(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("ambiguous peaks: {0}")]
    Ambiguous(String),

    #[error("non-informative signal: {0}")]
    NonInformative(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("malformed stack file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code for this error class: 2 for configuration problems,
    /// 3 for domain/analysis failures, 4 for I/O and file-format failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Domain(_)
            | Error::OutOfBounds(_)
            | Error::Degenerate(_)
            | Error::Ambiguous(_)
            | Error::NonInformative(_) => 3,
            Error::Format(_) | Error::Io(_) | Error::Csv(_) => 4,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
