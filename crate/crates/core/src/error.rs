use thiserror::Error;

#[derive(Debug, Error)]
pub enum GrayBoxError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("variable index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("dimension {n} exceeds the full-enumeration limit of {limit}")]
    ToyLimit { n: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("problem `{0}` has no Walsh expansion")]
    MissingExpansion(String),

    #[error("minimum fitness gap of the base problem is unknown; supply it explicitly")]
    UnknownFitnessGap,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, GrayBoxError>;
