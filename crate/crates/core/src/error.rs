use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("invalid bounds at index {index}: lower {lower} > upper {upper}")]
    InvalidBounds { index: usize, lower: f64, upper: f64 },

    #[error("point is infeasible at index {index}: {value} not in [{lower}, {upper}]")]
    Infeasible {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("Lanczos seed vector is zero (gradient is stationary)")]
    ZeroSeed,

    #[error("tridiagonal matrix is singular or indefinite")]
    SingularTridiagonal,

    #[error("Woodbury inner system is singular")]
    SingularCore,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("problem rejected: {0}")]
    Problem(String),
}
