use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: body has dimension {expected}, vector has {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("subspace dimension {l} exceeds ambient dimension {n}")]
    SubspaceTooLarge { n: usize, l: usize },

    #[error("gaussian draw stayed rank deficient after {attempts} attempts")]
    RankDeficient { attempts: usize },

    #[error("frame columns are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("p must be ≥ 1 (got {0})")]
    InvalidExponent(f64),

    #[error("malformed body spec `{spec}`: {reason}")]
    BodySpec { spec: String, reason: String },

    #[error("norm oracle rejected: {0}")]
    NotANorm(String),

    #[error("{method} gaussian measure is not available for body `{body}`")]
    IncompatibleMethod { method: &'static str, body: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numerical overflow of the moment integrand at sample {index} of {seed}")]
    MomentOverflow { seed: String, index: usize },

    #[error("Lipschitz constant unknown and heuristic estimation disabled")]
    LipschitzUnknown,
}

pub type Result<T> = std::result::Result<T, Error>;
