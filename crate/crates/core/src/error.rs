use thiserror::Error;

/// Errors raised across the crate.
///
/// Numerical failures carry `f64` diagnostics regardless of the working
/// precision so the error type stays non-generic.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("input contains non-finite entries")]
    NonFinite,
    #[error("matrix is numerically singular (pivot {pivot:.3e}, threshold {threshold:.3e}, condition estimate κ ≈ {condition:.3e})")]
    Singular {
        pivot: f64,
        threshold: f64,
        condition: f64,
    },
    #[error("eigenvector matrix is numerically singular (condition estimate {condition:.3e})")]
    Defective { condition: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("column {0} has zero norm")]
    ZeroColumn(usize),
    #[error("left/right vector pair is nearly orthogonal (|y*x| = {0:.3e})")]
    Biorthogonality(f64),
    #[error("joint eigenvalue is not semisimple: {0}")]
    NotSemisimple(String),
    #[error("tuple is not a joint eigenvalue of the family (distance {0:.3e})")]
    NotAnEigenvalue(f64),
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("dense size {size} exceeds the cap {cap}")]
    Overflow { size: usize, cap: usize },
    #[error("matrix is not positive definite (Cholesky failed at column {0})")]
    NotDefinite(usize),
    #[error("matrix is not real symmetric: {0}")]
    NotSymmetric(String),
    #[error("polynomial is not monic (leading coefficient {0})")]
    NotMonic(String),
    #[error("count mismatch: {0} computed vs {1} reference")]
    CountMismatch(usize, usize),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("expected kind \"{expected}\", found \"{found}\"")]
    KindMismatch { expected: String, found: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
