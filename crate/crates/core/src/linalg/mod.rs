//! Sparse storage and direct solvers.

mod lu;
mod multifrontal;
mod ordering;
mod sparse;

pub use lu::{lu_solve, Backend, Factorization, LinearSolver, NativeLu};
pub use multifrontal::{MultifrontalLu, SymbolicFronts};
pub use sparse::{norm2, PatternBuilder, SparseMatrix};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) outside a {n_rows}x{n_cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("malformed compressed-row arrays")]
    MalformedCsr,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is {n_rows}x{n_cols}, expected square")]
    NotSquare { n_rows: usize, n_cols: usize },
    #[error("matrix is numerically singular (no usable pivot in column {pivot})")]
    Singular { pivot: usize },
    #[error("relative residual {residual:.3e} exceeds {tolerance:.1e} after refinement")]
    ResidualTooLarge { residual: f64, tolerance: f64 },
    #[error("sparse factorization backend failed: {0}")]
    Backend(String),
}
