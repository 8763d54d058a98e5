use super::{
    check_inputs, finish, largest_magnitudes, HaltReason, RecoveryConfig, RecoveryResult,
    SensingOperator,
};
use crate::error::Result;
use crate::linalg::{self, IndexSet};

/// Compressive sampling matching pursuit.
///
/// Each pass merges the `2K` largest proxy entries with the current support,
/// solves least squares on the merged set and prunes back to `K`.
pub fn cosamp(op: &SensingOperator, y: &[f64], config: &RecoveryConfig) -> Result<RecoveryResult> {
    check_inputs(op, y, config)?;
    let n = op.cols();
    let k = config.sparsity;
    let y_norm = linalg::norm2(y);
    if y_norm == 0.0 {
        return Ok(finish(op, y, vec![0.0; n], 0, HaltReason::ResidualSmall, false));
    }
    let threshold = config.residual_tol * y_norm;
    let phi_t_y = op.phi().adjoint_mul_vec(y);

    let mut support = IndexSet::default();
    let mut values: Vec<f64> = Vec::new();
    let mut residual = y.to_vec();
    let mut flagged = false;
    let mut iterations = 0;
    let mut halt = HaltReason::MaxIterations;

    while iterations < config.max_iterations {
        let proxy = op.phi().adjoint_mul_vec(&residual);
        let merged = largest_magnitudes(&proxy, (2 * k).min(n)).union(&support);
        let sol = op.solve_on(&merged, &phi_t_y, config.solver);
        flagged |= sol.flagged;

        let pruned = largest_magnitudes(&sol.x, k);
        let next: Vec<usize> = pruned.iter().map(|p| merged.as_slice()[p]).collect();
        values = pruned.iter().map(|p| sol.x[p]).collect();
        let next = IndexSet::from_sorted(next);
        residual = linalg::sub(y, &op.apply_on(&next, &values));
        iterations += 1;

        let stable = next == support;
        support = next;
        if linalg::norm2(&residual) <= threshold {
            halt = HaltReason::ResidualSmall;
            break;
        }
        if stable {
            halt = HaltReason::SupportStable;
            break;
        }
    }

    let mut c_hat = vec![0.0; n];
    for (i, v) in support.iter().zip(values) {
        c_hat[i] = v;
    }
    Ok(finish(op, y, c_hat, iterations, halt, flagged))
}
