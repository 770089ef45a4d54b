use thiserror::Error;

/// Failures raised by state construction, numerics and geometry.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("matrix is not Hermitian (max |A - A^dagger| = {max_asymmetry:e})")]
    NotHermitian { max_asymmetry: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range 1..={max}")]
    Index { index: usize, max: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid density matrix: {}", .0.join("; "))]
    DensityMatrix(Vec<String>),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}
