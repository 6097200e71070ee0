//! Dense complex linear algebra: tensor products, general eigendecomposition
//! and biorthonormal left/right eigenvector sets.

mod eigen;
mod matrix;

pub use eigen::{
    biorthonormalize, decompose, eig_general, eig_general_with, invert, EigenSystem, CLUSTER_TOL,
    DEFAULT_TOL, DEFECT_THRESHOLD,
};
pub use matrix::{inner, kron_chain, pauli, vec_norm, ComplexMatrix};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("QR iteration failed to converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
    #[error("near-defective matrix: eigenvector condition estimate {condition:.3e}")]
    NearDefective { condition: f64 },
    #[error("unresolved degenerate cluster {levels:?}")]
    DegenerateCluster { levels: Vec<usize> },
    #[error("matrix is singular to working precision")]
    Singular,
}
