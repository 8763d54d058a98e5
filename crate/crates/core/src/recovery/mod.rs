//! Sparse recovery: partial inversion, its tree-scored variant, CoSaMP and an
//! iterative soft-thresholding stand-in for l1 basis pursuit.

mod cosamp;
mod diagnostics;
mod l1;
mod partinv;
mod tree;

pub use cosamp::cosamp;
pub use diagnostics::{estimator_decomposition, EstimatorNoise};
pub use l1::{l1_baseline, L1Settings};
pub use partinv::partinv;
pub use tree::{partinv_wavelet, select_sets, tree_scores};

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::linalg::{self, DenseMatrix, IndexSet, LeastSquares, SolveMethod};

/// How the size `L` of the inverted index set is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum LRule {
    /// `L = K`.
    Sparsity,
    Fixed(usize),
    /// `L = max(K, floor(fraction * M))`.
    MaxOfSparsityAnd(f64),
}

impl LRule {
    pub fn resolve(&self, sparsity: usize, rows: usize) -> usize {
        match *self {
            LRule::Sparsity => sparsity,
            LRule::Fixed(l) => l,
            LRule::MaxOfSparsityAnd(f) => sparsity.max((f * rows as f64).floor() as usize),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryConfig {
    pub sparsity: usize,
    pub l_rule: LRule,
    pub max_iterations: usize,
    /// Halt when `||y - Phi c|| <= residual_tol * ||y||`.
    pub residual_tol: f64,
    pub solver: SolveMethod,
    pub l1: L1Settings,
}

impl RecoveryConfig {
    pub fn new(sparsity: usize) -> Self {
        Self {
            sparsity,
            l_rule: LRule::Sparsity,
            max_iterations: 100,
            residual_tol: 1e-8,
            solver: SolveMethod::Direct,
            l1: L1Settings::default(),
        }
    }

    pub fn with_l_rule(mut self, rule: LRule) -> Self {
        self.l_rule = rule;
        self
    }

    pub fn with_solver(mut self, solver: SolveMethod) -> Self {
        self.solver = solver;
        self
    }

    /// Resolves `L` for an `M`-row operator, enforcing `K <= L < M`.
    pub fn resolve_l(&self, rows: usize) -> Result<usize> {
        let l = self.l_rule.resolve(self.sparsity, rows);
        if !(self.sparsity <= l && l < rows) {
            return invalid(format!(
                "L = {l} violates K <= L < M with K = {}, M = {rows}",
                self.sparsity
            ));
        }
        Ok(l)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    ResidualSmall,
    SupportStable,
    MaxIterations,
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HaltReason::ResidualSmall => "residual_small",
            HaltReason::SupportStable => "support_stable",
            HaltReason::MaxIterations => "max_iterations",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryResult {
    /// At most `K` nonzeros.
    pub c_hat: Vec<f64>,
    pub iterations: usize,
    /// `||y - Phi c_hat||_2`.
    pub residual_norm: f64,
    pub halt_reason: HaltReason,
    /// A least-squares solve needed the ridge fallback.
    pub flagged: bool,
}

impl RecoveryResult {
    pub fn support(&self) -> IndexSet {
        IndexSet::from_sorted(
            self.c_hat
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }
}

/// Sensing matrix together with its Gram matrix `Phi* Phi`, so that repeated
/// least-squares solves on column subsets only need a principal submatrix.
#[derive(Clone, Debug)]
pub struct SensingOperator {
    phi: DenseMatrix,
    gram: DenseMatrix,
}

impl SensingOperator {
    pub fn new(phi: DenseMatrix) -> Self {
        let gram = phi.gram();
        Self { phi, gram }
    }

    pub fn phi(&self) -> &DenseMatrix {
        &self.phi
    }

    pub fn gram(&self) -> &DenseMatrix {
        &self.gram
    }

    pub fn rows(&self) -> usize {
        self.phi.rows()
    }

    pub fn cols(&self) -> usize {
        self.phi.cols()
    }

    pub fn into_phi(self) -> DenseMatrix {
        self.phi
    }

    /// `Phi_I^dagger y`, given `phi_t_y = Phi* y`.
    pub(crate) fn solve_on(&self, support: &IndexSet, phi_t_y: &[f64], method: SolveMethod) -> LeastSquares {
        let rhs: Vec<f64> = support.iter().map(|i| phi_t_y[i]).collect();
        linalg::solve_gram(self.gram.principal_submatrix(support), &rhs, method)
    }

    /// `Phi c` for a vector stored as values on `support`.
    pub(crate) fn apply_on(&self, support: &IndexSet, values: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows()];
        for (j, &v) in support.iter().zip(values) {
            for (o, a) in out.iter_mut().zip(self.phi.column(j)) {
                *o += a * v;
            }
        }
        out
    }

    pub(crate) fn residual(&self, y: &[f64], c: &[f64]) -> Vec<f64> {
        linalg::sub(y, &self.phi.mul_vec(c))
    }
}

impl From<DenseMatrix> for SensingOperator {
    fn from(phi: DenseMatrix) -> Self {
        Self::new(phi)
    }
}

/// Indices of the `k` largest magnitudes; ties go to the lower index.
pub(crate) fn largest_magnitudes(values: &[f64], k: usize) -> IndexSet {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)));
    idx.truncate(k);
    idx.sort_unstable();
    IndexSet::from_sorted(idx)
}

pub(crate) fn check_inputs(op: &SensingOperator, y: &[f64], config: &RecoveryConfig) -> Result<()> {
    if y.len() != op.rows() {
        return invalid(format!(
            "measurement vector has length {}, operator has {} rows",
            y.len(),
            op.rows()
        ));
    }
    if op.rows() > op.cols() {
        return invalid(format!(
            "operator must have M <= N, got {}x{}",
            op.rows(),
            op.cols()
        ));
    }
    if config.sparsity == 0 || config.sparsity >= op.rows() {
        return invalid(format!(
            "sparsity K = {} must satisfy 0 < K < M = {}",
            config.sparsity,
            op.rows()
        ));
    }
    Ok(())
}

/// Keeps the `K` largest entries of `estimate`, re-solves least squares on
/// them and zeros the rest.
pub(crate) fn k_sparse_output(
    op: &SensingOperator,
    phi_t_y: &[f64],
    estimate: &[f64],
    config: &RecoveryConfig,
) -> (Vec<f64>, bool) {
    let support = largest_magnitudes(estimate, config.sparsity);
    let sol = op.solve_on(&support, phi_t_y, config.solver);
    let mut c = vec![0.0; op.cols()];
    for (i, v) in support.iter().zip(sol.x) {
        c[i] = v;
    }
    (c, sol.flagged)
}

pub(crate) fn finish(
    op: &SensingOperator,
    y: &[f64],
    c_hat: Vec<f64>,
    iterations: usize,
    halt_reason: HaltReason,
    flagged: bool,
) -> RecoveryResult {
    let residual_norm = linalg::norm2(&op.residual(y, &c_hat));
    RecoveryResult {
        c_hat,
        iterations,
        residual_norm,
        halt_reason,
        flagged,
    }
}
