use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reflection domain of size {k} exceeds chain length {len}")]
    DomainSize { k: usize, len: usize },

    #[error("eigenvalue iteration did not converge for index {index}")]
    NoConvergence { index: usize },

    #[error("eigen residual {residual:e} exceeds bound {bound:e}")]
    ResidualBound { residual: f64, bound: f64 },

    #[error("energy {energy} sits on a lead band edge (zero group velocity)")]
    SingularEnergy { energy: f64 },

    #[error("energy {energy} lies outside the propagating window of a lead")]
    OutsideBand { energy: f64 },

    #[error("linear solve failed: zero pivot at row {row}")]
    LinearSolve { row: usize },

    #[error("transfer-matrix product overflowed at site {site}")]
    Overflow { site: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
