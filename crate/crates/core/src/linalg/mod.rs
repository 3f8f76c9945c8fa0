//! Linear algebra kept to what the scheme needs: CSR matrices, the
//! block-diagonal lumped mass with per-block Cholesky factors, conjugate
//! gradients, and a Schur-complement solver for the mixed systems of the
//! post-processing and projection steps.

mod block;
mod cg;
mod envelope;
mod saddle;
mod sparse;

use thiserror::Error;

pub use block::BlockDiagMatrix;
pub use cg::{cg_solve, pcg, CgOutcome};
pub use envelope::{rcm_ordering, EnvelopeCholesky};
pub use saddle::{
    saddle_solve, saddle_solve_cg, CgInner, InnerSolver, SaddleOptions, SaddleSolution,
};
pub use sparse::SparseMatrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("{what} did not converge in {iterations} iterations (relative residual {residual:e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("block {block} is not symmetric positive definite")]
    NotSpd { block: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("CG breakdown: operator is not positive definite (pᵀAp = {0:e})")]
    Breakdown(f64),
}

/// A square linear map `y = A x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Adapter for closures.
pub struct FnOperator<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64], &mut [f64])> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// Diagonal matrix stored as its entries.
pub struct Diagonal<'a>(pub &'a [f64]);

impl LinearOperator for Diagonal<'_> {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(self.0) {
            *yi = d * xi;
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
