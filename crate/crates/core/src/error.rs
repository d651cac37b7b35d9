use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum NcfaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl NcfaError {
    /// Short machine-readable kind, used in CLI error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            NcfaError::InvalidArgument(_) => "invalid-argument",
            NcfaError::Unsupported(_) => "unsupported",
            NcfaError::NumericalFailure(_) => "numerical-failure",
            NcfaError::Io(_) => "io",
            NcfaError::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, NcfaError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(NcfaError::InvalidArgument(msg.into()))
}

pub(crate) fn unsupported<T>(msg: impl Into<String>) -> Result<T> {
    Err(NcfaError::Unsupported(msg.into()))
}
