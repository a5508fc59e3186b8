use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("degenerate transformation (determinant is zero)")]
    DegenerateTransform,

    #[error("polynomials are not coprime")]
    NotCoprime,

    #[error("both polynomials are zero")]
    ZeroPolynomials,

    #[error("declared degree {declared} is below the actual degree {actual}")]
    DegreeTooSmall { declared: usize, actual: usize },

    #[error("polynomial must have degree at least 1")]
    ConstantPolynomial,

    #[error("factorisation incomplete: composite cofactor {0} left unfactored")]
    IncompleteFactorization(String),

    #[error("bad reduction at {0}")]
    BadReduction(u64),

    #[error("expected {expected} orbit values, got {got}")]
    PrefixLength { expected: usize, got: usize },

    #[error("invalid search configuration: {0}")]
    Config(String),

    #[error("corrupt checkpoint: {0}")]
    Checkpoint(String),

    #[error("interrupted: {0}")]
    Interrupted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
