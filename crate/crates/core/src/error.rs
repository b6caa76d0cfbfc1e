use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("unsupported field degree m={0} (stored moduli exist for m = 3, 5, 7)")]
    UnsupportedDegree(u32),

    #[error("r={r} is too large for m={m} (need r <= {max})")]
    OrderTooLarge { m: u32, r: u32, max: u32 },

    #[error("m={0} must be odd")]
    EvenDegree(u32),

    #[error("invalid column index: {0}")]
    InvalidIndex(String),

    #[error("column indices belong to different frames")]
    FrameMismatch,

    #[error("materializing {columns} columns exceeds the configured limit of {limit}")]
    ResourceLimit { columns: u64, limit: u64 },

    #[error("{count} supports exceed the enumeration ceiling of {limit}")]
    CeilingExceeded { count: u128, limit: u128 },

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("empty sample set")]
    EmptySamples,

    #[error("non-finite feature value in sample {0}")]
    NonFinite(usize),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
