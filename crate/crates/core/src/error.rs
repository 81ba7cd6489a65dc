use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("defective superoperator: eigenvector overlap {overlap:e} for eigenvalue {eigenvalue}")]
    Defective { eigenvalue: Complex64, overlap: f64 },

    #[error("Choi operator is not Hermitian (deviation {deviation:e})")]
    NonHermitianChoi { deviation: f64 },

    #[error("eigenvector of nondegenerate eigenvalue {eigenvalue:e} mixes parity sectors (leak {leak:e})")]
    ParityMixing { eigenvalue: f64, leak: f64 },

    #[error("trace preservation violated (deviation {deviation:e})")]
    TraceViolation { deviation: f64 },

    #[error("decomposition does not reconstruct its input (residual {residual:e})")]
    Reconstruction { residual: f64 },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("pole: {0}")]
    Pole(String),

    #[error("ill-conditioned inversion (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("missing capability: {0}")]
    Missing(String),

    #[error("ambiguous pairing: {0}")]
    Ambiguous(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
