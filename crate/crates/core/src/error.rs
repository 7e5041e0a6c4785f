use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("automorphism parameter must lie in the open unit disk, got |a| = {0}")]
    InvalidAutomorphism(f64),

    #[error("zero {index} has modulus {modulus}, beyond the boundary guard 1 - {guard:e}")]
    BoundaryGuard { index: usize, modulus: f64, guard: f64 },

    #[error("expected a unimodular value, got modulus {0}")]
    NotUnimodular(f64),

    #[error("operation requires B(0) = 0")]
    NonVanishingAtOrigin,

    #[error("quadrature too coarse: {0}")]
    Quadrature(String),

    #[error("level-set solve failed: {0}")]
    LevelSet(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operators expressed in different bases")]
    BasisMismatch,

    #[error("matrix is not self-adjoint (deviation {0:e})")]
    NotSelfAdjoint(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("hypothesis search failed: {0}")]
    HypothesisSearch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
