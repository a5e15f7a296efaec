use thiserror::Error;

#[derive(Debug, Error)]
pub enum QbakerError {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("eigensolver failed: {0}")]
    Solver(String),

    #[error("eigendecomposition residual {residual:.3e} exceeds bound {bound:.3e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QbakerError>;
