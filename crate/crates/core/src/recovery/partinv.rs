use super::{
    check_inputs, finish, k_sparse_output, largest_magnitudes, HaltReason, RecoveryConfig,
    RecoveryResult, SensingOperator,
};
use crate::error::Result;
use crate::linalg::{self, IndexSet};

/// Partial inversion.
///
/// Starting from the proxy `Phi* y`, repeatedly inverts `Phi` on the `L`
/// largest entries, correlates the leftover residual with the remaining
/// columns, and reselects the `L` largest entries of the combined estimate.
/// Stops on a small residual, an unchanged index set, or the iteration cap,
/// then returns the least-squares fit on the `K` largest entries.
pub fn partinv(op: &SensingOperator, y: &[f64], config: &RecoveryConfig) -> Result<RecoveryResult> {
    check_inputs(op, y, config)?;
    let l = config.resolve_l(op.rows())?;
    Ok(partial_inversion(op, y, config, |estimate| largest_magnitudes(estimate, l)))
}

/// Shared loop for both partial-inversion variants; `select` maps the current
/// estimate to the next index set.
pub(crate) fn partial_inversion(
    op: &SensingOperator,
    y: &[f64],
    config: &RecoveryConfig,
    select: impl Fn(&[f64]) -> IndexSet,
) -> RecoveryResult {
    let n = op.cols();
    let y_norm = linalg::norm2(y);
    let phi_t_y = op.phi().adjoint_mul_vec(y);
    if y_norm == 0.0 {
        return finish(op, y, vec![0.0; n], 0, HaltReason::ResidualSmall, false);
    }
    let threshold = config.residual_tol * y_norm;

    let mut estimate = phi_t_y.clone();
    let mut active = select(&estimate);
    let mut flagged = false;
    let mut iterations = 0;
    let mut halt = HaltReason::MaxIterations;

    while iterations < config.max_iterations {
        let sol = op.solve_on(&active, &phi_t_y, config.solver);
        flagged |= sol.flagged;
        let residual = linalg::sub(y, &op.apply_on(&active, &sol.x));
        estimate = op.phi().adjoint_mul_vec(&residual);
        for (i, v) in active.iter().zip(&sol.x) {
            estimate[i] = *v;
        }
        iterations += 1;

        if linalg::norm2(&op.residual(y, &estimate)) <= threshold {
            halt = HaltReason::ResidualSmall;
            break;
        }
        let next = select(&estimate);
        if next == active {
            halt = HaltReason::SupportStable;
            break;
        }
        active = next;
    }

    let (c_hat, output_flag) = k_sparse_output(op, &phi_t_y, &estimate, config);
    finish(op, y, c_hat, iterations, halt, flagged || output_flag)
}
