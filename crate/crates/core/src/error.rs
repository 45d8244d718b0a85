//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("matrix is not hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("bad dimension: {0}")]
    BadDimension(String),

    #[error("vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("conditional block at clock reading {tau} has norm {norm:.3e}; this reading never occurs")]
    ZeroConditionalBlock { tau: usize, norm: f64 },

    #[error("operators do not commute (residual {0:.3e})")]
    NotCommuting(f64),

    #[error("joint spectrum is degenerate: {0}")]
    DegenerateJointSpectrum(String),

    #[error("joint spectrum is not a full product grid: {0}")]
    NotProductGrid(String),

    #[error("incompatible dimensions: {0}")]
    IncompatibleDimensions(String),

    #[error("rest law is not cyclic: {0}")]
    NotCyclic(String),

    #[error("invalid history: {0}")]
    InvalidHistory(String),

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}
