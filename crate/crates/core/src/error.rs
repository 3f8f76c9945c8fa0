use thiserror::Error;

use crate::linalg::SolverError;
use crate::mesh::MeshError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("point ({x}, {y}) lies outside cell {cell}")]
    PointOutsideCell { cell: usize, x: f64, y: f64 },
    #[error("time step {tau} exceeds the stability bound {tau_max}")]
    CflViolation { tau: f64, tau_max: f64 },
    #[error("non-finite values after step {step} (time step too large?)")]
    NonFinite { step: usize },
    #[error("size mismatch: {0}")]
    SizeMismatch(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
