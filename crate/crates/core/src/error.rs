use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid IFS: {0}")]
    InvalidIfs(String),
    #[error("branch index {index} out of range for alphabet of size {alphabet}")]
    IndexOutOfRange { index: usize, alphabet: usize },
    #[error("operation requires a homogeneous IFS (all denominators equal)")]
    InhomogeneousInput,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("gcd({q}, {b}) != 1")]
    NotCoprime { q: u64, b: u64 },
    #[error("budget exceeded: {0} (raise CANTOR_DIOPH_BUDGET or pass a larger --budget)")]
    Budget(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
