use thiserror::Error;

/// Errors raised across the laboratory.
///
/// The variants map onto the CLI exit codes: configuration and usage
/// problems exit with 2, numerical aborts with 3.
#[derive(Debug, Error)]
pub enum VnsError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal error: {0}")]
    Internal(String),
    #[error("numerical abort at t = {t}: {reason}")]
    Numerical { t: f64, reason: String },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl VnsError {
    pub fn exit_code(&self) -> i32 {
        match self {
            VnsError::Numerical { .. } => 3,
            VnsError::Config(_) | VnsError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, VnsError>;
