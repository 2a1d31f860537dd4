use thiserror::Error;

use crate::linsolve::SolverError;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("point ({x}, {y}) lies outside the mesh")]
    OutOfDomain { x: f64, y: f64 },

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("solver failure in block '{block}' (block-local dof {dof}): {source}")]
    SolverInBlock {
        block: String,
        dof: usize,
        #[source]
        source: SolverError,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
