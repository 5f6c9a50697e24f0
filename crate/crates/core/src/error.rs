use thiserror::Error;

pub type Result<T, E = ChhError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum ChhError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed line {line}: {reason}")]
    MalformedLine { line: u64, reason: String },

    #[error("unsupported source: {0}")]
    UnsupportedSource(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("inconsistent input: {0}")]
    InconsistentInput(String),

    #[error("bad snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ChhError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        ChhError::InvalidParameter(msg.into())
    }
}
