use thiserror::Error;

/// Errors raised anywhere in the decomposition pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("singular value decomposition did not converge ({rows}x{cols})")]
    SvdFailed { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("state is not normalized (norm {norm:.3e}): {what}")]
    NotNormalized { what: String, norm: f64 },

    #[error("zero normalization in gap denominator")]
    ZeroDenominator,

    #[error("{source_name}:{line}:{column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
