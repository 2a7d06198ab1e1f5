use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("tuple space of {size} exceeds the enumeration cap of {cap}")]
    CapExceeded { size: u128, cap: u64 },

    #[error("invalid tuple {tuple:?}: {reason}")]
    InvalidTuple { tuple: Vec<usize>, reason: String },

    #[error("invalid probability column: {0}")]
    InvalidColumn(String),

    #[error("dimension mismatch: expected {expected} entries, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no surviving path has exactly {transitions} transitions")]
    NoValidPath { transitions: usize },

    #[error("brute-force enumeration of {size} assignments exceeds the guard of {limit}")]
    SizeGuard { size: u128, limit: u128 },

    #[error("post-processing buffer holds {actual} frames, expected {expected}")]
    BufferLength { expected: usize, actual: usize },

    #[error("cannot aggregate an empty set of records")]
    EmptyInput,

    #[error("frame budget {budget} is below the minimum allocation of {required} frames")]
    InfeasibleBudget { budget: usize, required: usize },

    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
