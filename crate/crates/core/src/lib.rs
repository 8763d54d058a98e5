//! Sparse recovery with partial inversion.
//!
//! Greedy recovery for sensing matrices whose columns are strongly
//! correlated within known groups, together with CoSaMP and an l1 baseline,
//! generators for Gaussian, block-correlated and wavelet-tree problems, and a
//! seeded phase-transition harness with CSV and SVG output.

pub mod ensembles;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod recovery;
pub mod render;
pub mod seed;

pub use ensembles::{SetPartition, SparseProblem};
pub use error::{Error, Result};
pub use linalg::{DenseMatrix, IndexSet, LeastSquares, SolveMethod};
pub use recovery::{
    cosamp, l1_baseline, partinv, partinv_wavelet, HaltReason, LRule, RecoveryConfig,
    RecoveryResult, SensingOperator,
};
