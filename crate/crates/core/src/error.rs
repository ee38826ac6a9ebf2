use thiserror::Error;

/// Errors raised by factorizations and their building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("domain error: {0}")]
    Domain(String),

    /// A triangular factor is singular to working precision; `rank` leading
    /// diagonal entries are usable.
    #[error("numerically rank deficient after {rank} columns")]
    RankDeficient { rank: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! ensure_dims {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err($crate::Error::DimensionMismatch(format!($($arg)+)));
        }
    };
}
pub(crate) use ensure_dims;
