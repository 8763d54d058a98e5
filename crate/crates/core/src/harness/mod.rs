//! Phase-transition experiments: seeded trials over a (delta, rho) grid.
//!
//! Every trial seed is derived from `(base_seed, ensemble, delta index, row
//! index, trial index)` only, so each cell can be computed (or recomputed) on
//! its own and the outcome does not depend on scheduling.

mod export;

pub use export::{
    export_grid, export_grid_with, parse_grid_csv, successes_from_csv, CsvRecord, ExportFormat,
    ExportOptions,
};

use std::borrow::Cow;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::ensembles::{
    block_correlated_ensemble_with, gaussian_ensemble, tree_sparse_signal, wavelet_tree_operator,
    SamplingPattern, SetPartition, BLOCK_NOISE_VARIANCE, BLUR_CENTER, BLUR_OFF_CENTER, TREE_SIZE,
};
use crate::error::{invalid, Error, Result};
use crate::linalg::SolveMethod;
use crate::recovery::{
    cosamp, l1_baseline, partinv, partinv_wavelet, LRule, RecoveryConfig, RecoveryResult,
    SensingOperator,
};

/// Mean squared coefficient error below which a trial counts as a success.
pub const SUCCESS_THRESHOLD: f64 = 1e-5;

/// `(1/N) ||c - c_hat||^2 < 1e-5`.
pub fn is_success(c_true: &[f64], c_hat: &[f64]) -> bool {
    mean_squared_error(c_true, c_hat) < SUCCESS_THRESHOLD
}

pub fn mean_squared_error(c_true: &[f64], c_hat: &[f64]) -> f64 {
    assert_eq!(c_true.len(), c_hat.len());
    c_true
        .iter()
        .zip(c_hat)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / c_true.len() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnsembleSpec {
    Gaussian { n: usize },
    Block { n: usize, noise_variance: f64 },
    /// Blurred, subsampled 2-D wavelet basis on a 32x32 patch; `delta`
    /// selects one of the tabulated sampling patterns.
    Wavelet,
}

impl EnsembleSpec {
    pub fn gaussian() -> Self {
        EnsembleSpec::Gaussian { n: 256 }
    }

    pub fn block() -> Self {
        EnsembleSpec::Block {
            n: 256,
            noise_variance: BLOCK_NOISE_VARIANCE,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            EnsembleSpec::Gaussian { .. } => "gaussian",
            EnsembleSpec::Block { .. } => "block",
            EnsembleSpec::Wavelet => "wavelet",
        }
    }

    fn seed_tag(&self) -> u64 {
        match self {
            EnsembleSpec::Gaussian { .. } => 1,
            EnsembleSpec::Block { .. } => 2,
            EnsembleSpec::Wavelet => 3,
        }
    }

    pub fn columns(&self) -> usize {
        match *self {
            EnsembleSpec::Gaussian { n } | EnsembleSpec::Block { n, .. } => n,
            EnsembleSpec::Wavelet => 1024,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Method {
    PartInv(LRule),
    CoSaMP,
    L1,
    PartInvWavelet,
}

impl Method {
    pub fn id(&self) -> String {
        match self {
            Method::PartInv(LRule::Sparsity) => "partinv".into(),
            Method::PartInv(LRule::Fixed(l)) => format!("partinv-l{l}"),
            Method::PartInv(LRule::MaxOfSparsityAnd(f)) => {
                format!("partinv-max{}", f.to_string().replace('.', ""))
            }
            Method::CoSaMP => "cosamp".into(),
            Method::L1 => "l1".into(),
            Method::PartInvWavelet => "partinv-wavelet".into(),
        }
    }

    /// Runs the method on one instance.
    pub fn run(
        &self,
        op: &SensingOperator,
        y: &[f64],
        sparsity: usize,
        partition: Option<&SetPartition>,
        solver: SolveMethod,
    ) -> Result<RecoveryResult> {
        let config = RecoveryConfig::new(sparsity).with_solver(solver);
        match *self {
            Method::PartInv(rule) => partinv(op, y, &config.with_l_rule(rule)),
            Method::CoSaMP => cosamp(op, y, &config),
            Method::L1 => l1_baseline(op, y, &config),
            Method::PartInvWavelet => {
                let partition = partition.ok_or_else(|| {
                    Error::InvalidArgument("partinv-wavelet needs a column partition".into())
                })?;
                partinv_wavelet(op, y, partition, &config)
            }
        }
    }
}

/// Vertical coordinate of a grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum SparsityLevel {
    /// `rho = K / M`.
    Ratio(f64),
    /// Whole wavelet trees (`K = 21 * trees`).
    Trees(usize),
}

impl SparsityLevel {
    pub fn label(&self) -> String {
        match self {
            SparsityLevel::Ratio(r) => format!("{r:.2}"),
            SparsityLevel::Trees(t) => t.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    pub deltas: Vec<f64>,
    pub rows: Vec<SparsityLevel>,
}

impl GridSpec {
    /// `delta, rho` in `{0.1, .., 0.9}`.
    pub fn standard() -> Self {
        let steps: Vec<f64> = (1..=9).map(|i| i as f64 / 10.0).collect();
        Self {
            deltas: steps.clone(),
            rows: steps.into_iter().map(SparsityLevel::Ratio).collect(),
        }
    }

    /// Every tabulated sampling pattern against the given tree counts.
    pub fn wavelet(tree_counts: &[usize]) -> Self {
        Self {
            deltas: SamplingPattern::TABULATED
                .iter()
                .map(|&s| s as f64 / 16.0)
                .collect(),
            rows: tree_counts.iter().map(|&t| SparsityLevel::Trees(t)).collect(),
        }
    }

    pub fn single(delta: f64, row: SparsityLevel) -> Self {
        Self {
            deltas: vec![delta],
            rows: vec![row],
        }
    }
}

/// Default tree counts for the wavelet grid.
pub const DEFAULT_TREE_COUNTS: [usize; 10] = [1, 2, 3, 4, 6, 8, 12, 16, 24, 32];

/// Position of a cell in a grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSpec {
    pub delta_index: usize,
    pub row_index: usize,
    pub delta: f64,
    pub row: SparsityLevel,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CellOutcome {
    Skipped { reason: String },
    Completed {
        /// Per-trial success, in trial order.
        outcomes: Vec<bool>,
        mean_runtime_ms: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellResult {
    pub delta: f64,
    /// Reported `K / M` (nominal when the cell was skipped before `M` was known).
    pub rho: f64,
    pub rows: Option<usize>,
    pub sparsity: Option<usize>,
    pub outcome: CellOutcome,
}

impl CellResult {
    pub fn successes(&self) -> Option<usize> {
        match &self.outcome {
            CellOutcome::Completed { outcomes, .. } => Some(outcomes.iter().filter(|s| **s).count()),
            CellOutcome::Skipped { .. } => None,
        }
    }

    pub fn success_fraction(&self) -> Option<f64> {
        match &self.outcome {
            CellOutcome::Completed { outcomes, .. } if !outcomes.is_empty() => {
                Some(self.successes().unwrap_or(0) as f64 / outcomes.len() as f64)
            }
            _ => None,
        }
    }

    pub fn is_skipped(&self) -> bool {
        matches!(self.outcome, CellOutcome::Skipped { .. })
    }

    pub fn mean_runtime_ms(&self) -> Option<f64> {
        match self.outcome {
            CellOutcome::Completed { mean_runtime_ms, .. } => Some(mean_runtime_ms),
            CellOutcome::Skipped { .. } => None,
        }
    }
}

/// Success counts for one method over a grid. Cells are stored row-major:
/// `cells[row * deltas + delta]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseGrid {
    pub ensemble: String,
    pub method: String,
    pub delta_values: Vec<f64>,
    pub rows: Vec<SparsityLevel>,
    pub trials_per_cell: usize,
    pub base_seed: u64,
    pub cells: Vec<CellResult>,
}

impl PhaseGrid {
    pub fn cell(&self, delta_index: usize, row_index: usize) -> &CellResult {
        &self.cells[row_index * self.delta_values.len() + delta_index]
    }

    pub fn success_fraction(&self, delta_index: usize, row_index: usize) -> Option<f64> {
        self.cell(delta_index, row_index).success_fraction()
    }

    /// `successes[delta][row]`, `None` for skipped cells.
    pub fn successes(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.delta_values.len())
            .map(|d| (0..self.rows.len()).map(|r| self.cell(d, r).successes()).collect())
            .collect()
    }

    /// Completed cells whose success fraction is at least `fraction`.
    pub fn cells_at_least(&self, fraction: f64) -> usize {
        self.cells
            .iter()
            .filter(|c| c.success_fraction().is_some_and(|f| f >= fraction))
            .count()
    }
}

/// Settings shared by every trial of a run.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RunOptions {
    pub solver: SolveMethod,
}

/// Per-column state: the operator for pattern-based ensembles is built once.
enum Column {
    Random { spec: EnsembleSpec, rows: usize },
    Wavelet { op: SensingOperator, partition: SetPartition },
}

impl Column {
    fn new(ensemble: &EnsembleSpec, delta: f64) -> Result<Self> {
        match ensemble {
            EnsembleSpec::Wavelet => {
                let pattern = SamplingPattern::for_delta(delta)?;
                let w = wavelet_tree_operator(&pattern, BLUR_CENTER, BLUR_OFF_CENTER)?;
                Ok(Column::Wavelet {
                    op: SensingOperator::new(w.phi),
                    partition: w.partition,
                })
            }
            spec => {
                let n = spec.columns();
                if !(delta > 0.0 && delta <= 1.0) {
                    return invalid(format!("delta = {delta} outside (0, 1]"));
                }
                let rows = (delta * n as f64).round() as usize;
                if rows == 0 {
                    return invalid(format!("delta = {delta} gives M = 0"));
                }
                Ok(Column::Random {
                    spec: spec.clone(),
                    rows,
                })
            }
        }
    }

    fn rows(&self) -> usize {
        match self {
            Column::Random { rows, .. } => *rows,
            Column::Wavelet { op, .. } => op.rows(),
        }
    }

    /// `K` for a row, or the reason the cell cannot run.
    fn sparsity(&self, row: SparsityLevel) -> std::result::Result<usize, String> {
        let m = self.rows();
        let k = match (self, row) {
            (Column::Random { .. }, SparsityLevel::Ratio(rho)) => (rho * m as f64).round() as usize,
            (Column::Wavelet { .. }, SparsityLevel::Trees(t)) => TREE_SIZE * t,
            (Column::Random { .. }, SparsityLevel::Trees(_)) => {
                return Err("tree counts need the wavelet ensemble".into())
            }
            (Column::Wavelet { .. }, SparsityLevel::Ratio(_)) => {
                return Err("the wavelet ensemble is indexed by tree count".into())
            }
        };
        if k == 0 || k >= m {
            return Err(format!("need 1 <= K < M, got K={k} M={m}"));
        }
        Ok(k)
    }

    fn trial(&self, row: SparsityLevel, k: usize, seed: u64) -> Result<Trial<'_>> {
        match self {
            Column::Random { spec, rows } => {
                let problem = match *spec {
                    EnsembleSpec::Gaussian { n } => gaussian_ensemble(*rows, n, k, seed)?,
                    EnsembleSpec::Block { n, noise_variance } => {
                        block_correlated_ensemble_with(*rows, n, k, noise_variance, seed)?
                    }
                    EnsembleSpec::Wavelet => unreachable!(),
                };
                Ok(Trial {
                    op: Cow::Owned(SensingOperator::new(problem.phi)),
                    y: problem.y,
                    c_true: problem.c_true,
                    partition: problem.partition.map(Cow::Owned),
                })
            }
            Column::Wavelet { op, partition } => {
                let SparsityLevel::Trees(t) = row else {
                    unreachable!("checked by sparsity()")
                };
                let c_true = tree_sparse_signal(partition, t, seed)?;
                Ok(Trial {
                    y: op.phi().mul_vec(&c_true),
                    op: Cow::Borrowed(op),
                    c_true,
                    partition: Some(Cow::Borrowed(partition)),
                })
            }
        }
    }
}

struct Trial<'a> {
    op: Cow<'a, SensingOperator>,
    y: Vec<f64>,
    c_true: Vec<f64>,
    partition: Option<Cow<'a, SetPartition>>,
}

fn reported_rho(row: SparsityLevel, rows: Option<usize>) -> f64 {
    match (row, rows) {
        (SparsityLevel::Ratio(r), _) => r,
        (SparsityLevel::Trees(t), Some(m)) => (TREE_SIZE * t) as f64 / m as f64,
        (SparsityLevel::Trees(_), None) => f64::NAN,
    }
}

fn skipped(delta: f64, row: SparsityLevel, rows: Option<usize>, reason: String) -> CellResult {
    CellResult {
        delta,
        rho: reported_rho(row, rows),
        rows,
        sparsity: None,
        outcome: CellOutcome::Skipped { reason },
    }
}

/// Runs every method on every trial of one cell; one result per method.
#[allow(clippy::too_many_arguments)]
fn run_cell_in(
    column: &Column,
    ensemble: &EnsembleSpec,
    methods: &[Method],
    cell: CellSpec,
    trials: usize,
    base_seed: u64,
    options: RunOptions,
) -> Vec<CellResult> {
    let m = column.rows();
    let k = match column.sparsity(cell.row) {
        Ok(k) => k,
        Err(reason) => {
            return methods
                .iter()
                .map(|_| skipped(cell.delta, cell.row, Some(m), reason.clone()))
                .collect()
        }
    };
    if let Some(reason) = methods.iter().find_map(|method| match method {
        Method::PartInv(rule) => RecoveryConfig::new(k)
            .with_l_rule(*rule)
            .resolve_l(m)
            .err()
            .map(|e| e.to_string()),
        _ => None,
    }) {
        return methods
            .iter()
            .map(|_| skipped(cell.delta, cell.row, Some(m), reason.clone()))
            .collect();
    }

    let seed_of = |t: usize| {
        crate::seed::trial_seed(base_seed, ensemble.seed_tag(), cell.delta_index, cell.row_index, t)
    };
    // generator preconditions depend only on (M, K), so trial 0 decides feasibility
    if let Err(e) = column.trial(cell.row, k, seed_of(0)) {
        return methods
            .iter()
            .map(|_| skipped(cell.delta, cell.row, Some(m), e.to_string()))
            .collect();
    }

    let per_trial: Vec<Vec<(bool, f64)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let trial = column
                .trial(cell.row, k, seed_of(t))
                .expect("feasibility established on trial 0");
            methods
                .iter()
                .map(|method| {
                    let start = Instant::now();
                    let result = method.run(
                        &trial.op,
                        &trial.y,
                        k,
                        trial.partition.as_deref(),
                        options.solver,
                    );
                    let elapsed = start.elapsed().as_secs_f64() * 1e3;
                    let ok = result.is_ok_and(|r| is_success(&trial.c_true, &r.c_hat));
                    (ok, elapsed)
                })
                .collect()
        })
        .collect();

    (0..methods.len())
        .map(|mi| {
            let outcomes: Vec<bool> = per_trial.iter().map(|t| t[mi].0).collect();
            let mean_runtime_ms = if trials == 0 {
                0.0
            } else {
                per_trial.iter().map(|t| t[mi].1).sum::<f64>() / trials as f64
            };
            CellResult {
                delta: cell.delta,
                rho: reported_rho(cell.row, Some(m)),
                rows: Some(m),
                sparsity: Some(k),
                outcome: CellOutcome::Completed {
                    outcomes,
                    mean_runtime_ms,
                },
            }
        })
        .collect()
}

/// Runs one method on one cell.
pub fn run_cell(
    ensemble: &EnsembleSpec,
    method: &Method,
    cell: CellSpec,
    trials: usize,
    base_seed: u64,
    options: RunOptions,
) -> CellResult {
    match Column::new(ensemble, cell.delta) {
        Ok(column) => run_cell_in(
            &column,
            ensemble,
            std::slice::from_ref(method),
            cell,
            trials,
            base_seed,
            options,
        )
        .pop()
        .expect("one result per method"),
        Err(e) => skipped(cell.delta, cell.row, None, e.to_string()),
    }
}

/// Runs every method over the grid; one [`PhaseGrid`] per method, in order.
/// All methods see the same problem instances.
pub fn run_grid(
    ensemble: &EnsembleSpec,
    methods: &[Method],
    grid: &GridSpec,
    trials: usize,
    base_seed: u64,
    options: RunOptions,
) -> Result<Vec<PhaseGrid>> {
    if grid.deltas.is_empty() || grid.rows.is_empty() {
        return invalid("grid needs at least one delta and one sparsity level");
    }
    if methods.is_empty() {
        return invalid("no methods requested");
    }
    let (nd, nr) = (grid.deltas.len(), grid.rows.len());
    let mut cells: Vec<Vec<Option<CellResult>>> = vec![vec![None; nd * nr]; methods.len()];

    for (d, &delta) in grid.deltas.iter().enumerate() {
        let column = Column::new(ensemble, delta);
        for (r, &row) in grid.rows.iter().enumerate() {
            let results = match &column {
                Ok(column) => run_cell_in(
                    column,
                    ensemble,
                    methods,
                    CellSpec {
                        delta_index: d,
                        row_index: r,
                        delta,
                        row,
                    },
                    trials,
                    base_seed,
                    options,
                ),
                Err(e) => methods
                    .iter()
                    .map(|_| skipped(delta, row, None, e.to_string()))
                    .collect(),
            };
            for (mi, result) in results.into_iter().enumerate() {
                cells[mi][r * nd + d] = Some(result);
            }
        }
    }

    Ok(methods
        .iter()
        .zip(cells)
        .map(|(method, cells)| PhaseGrid {
            ensemble: ensemble.id().to_string(),
            method: method.id(),
            delta_values: grid.deltas.clone(),
            rows: grid.rows.clone(),
            trials_per_cell: trials,
            base_seed,
            cells: cells.into_iter().map(|c| c.expect("every cell visited")).collect(),
        })
        .collect())
}

/// True when `values[j] <= values[i]` for all `j >= i + 2`: non-increasing,
/// allowing adjacent cells to be out of order. `None` entries are ignored.
pub fn non_increasing_with_slack(values: &[Option<f64>]) -> bool {
    let present: Vec<f64> = values.iter().flatten().copied().collect();
    (0..present.len()).all(|i| (i + 2..present.len()).all(|j| present[j] <= present[i]))
}
