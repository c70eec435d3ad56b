use thiserror::Error;

use crate::factorizer::RelationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("lambda must be nonzero")]
    ZeroLambda,

    #[error("non-finite integrand value at node {node:?}")]
    NonFinite { node: Vec<f64> },

    #[error("truncation scheme or lambda mismatch: {0}")]
    SchemeMismatch(String),

    #[error("matrix is not unitary (defect {defect:e})")]
    NotUnitary { defect: f64 },

    #[error("homomorphism is zero: Q_00 has rank 0")]
    ZeroHomomorphism,

    #[error("generator relations fail (product residual {:e}, adjoint residual {:e})", .0.max_product_residual, .0.max_adjoint_residual)]
    RelationsFailed(Box<RelationReport>),

    #[error("psi is not normalized at lambda: integral of psi(t) e^(i lambda t) is {re:e}{im:+e}i, expected 1")]
    PsiNormalization { re: f64, im: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("archive format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
