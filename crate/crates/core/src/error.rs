use thiserror::Error;

/// Errors raised by model construction and the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:.3e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("function undefined at eigenvalue {eigenvalue}")]
    Domain { eigenvalue: f64 },

    #[error("map is not linear (deviation {deviation:.3e})")]
    NotLinear { deviation: f64 },

    #[error("negative eigenvalue {eigenvalue:.3e} in an operator that must be positive")]
    NotPositive { eigenvalue: f64 },

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("subspace is not a *-subalgebra: {0}")]
    NotSubalgebra(String),

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("unknown operator mean '{0}'")]
    UnknownMean(String),

    #[error("problem size {size} exceeds the exact-mode cap {cap}; use sampled mode")]
    SizeCap { size: usize, cap: usize },

    #[error("rank detection is ambiguous: singular values {0:?}")]
    RankDetection(Vec<f64>),

    #[error("not a group: {0}")]
    NotAGroup(String),

    #[error("endpoints are not connectable (residual {residual:.3e})")]
    NotConnectable { residual: f64 },

    #[error("no valid sample: {0}")]
    NoValidSample(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("unknown model '{0}'")]
    UnknownModel(String),

    #[error("numerical paths disagree: {0}")]
    Inconsistent(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
