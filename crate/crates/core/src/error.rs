use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A weight, box, statistic or config string could not be parsed.
    #[error("parse error at `{token}`: {reason}")]
    Parse { token: String, reason: String },

    /// The weight sequence gives zero total mass to every permutation of this size.
    #[error("degenerate model: h_{n} = 0, no permutation of size {n} has positive weight")]
    DegenerateModel { n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid cycle tuples: {0}")]
    InvalidCycles(String),

    /// Brute-force enumeration was asked for more than it is allowed to do.
    #[error("resource bound exceeded: n = {n} exceeds the enumeration cap {max}")]
    ResourceBound { n: usize, max: usize },

    /// The value is too large for an f64; `log_value` holds its natural log.
    #[error("overflow: value exceeds f64 range (log value {log_value})")]
    Overflow { log_value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(token: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            token: token.into(),
            reason: reason.into(),
        }
    }
}
