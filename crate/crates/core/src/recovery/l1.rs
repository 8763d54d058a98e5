//! l1 baseline: basis pursuit `min ||c||_1 subject to Phi c = y`, solved by
//! ADMM (alternating projection onto the affine constraint set and
//! soft-thresholding), then a least-squares fit on the `K` largest entries of
//! the solution.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::Serialize;

use super::{check_inputs, finish, k_sparse_output, HaltReason, RecoveryConfig, RecoveryResult, SensingOperator};
use crate::error::Result;
use crate::linalg::{self, factor, RIDGE_EPSILON};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct L1Settings {
    pub max_iterations: usize,
    /// Relative tolerance on both the primal and the dual residual.
    pub tol: f64,
    /// Augmented-Lagrangian weight. `None` picks `1 / mean |c0|`, where `c0`
    /// is the minimum-norm solution of `Phi c = y`.
    pub penalty: Option<f64>,
}

impl Default for L1Settings {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tol: 1e-10,
            penalty: None,
        }
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Orthogonal projection onto `{c : Phi c = y}`.
struct AffineProjector<'a> {
    phi: &'a DMatrix<f64>,
    outer: Cholesky<f64, Dyn>,
    y: DVector<f64>,
}

impl<'a> AffineProjector<'a> {
    /// Returns the projector and whether `Phi Phi*` needed a ridge term.
    fn new(phi: &'a DMatrix<f64>, y: &[f64]) -> (Self, bool) {
        let outer = phi * phi.transpose();
        let (chol, flagged) = match factor(outer.clone()) {
            Some(chol) => (chol, false),
            None => {
                let m = outer.nrows();
                let ridge = RIDGE_EPSILON * outer.trace().max(f64::MIN_POSITIVE) / m as f64;
                let mut regularized = outer;
                for i in 0..m {
                    regularized[(i, i)] += ridge;
                }
                let chol = Cholesky::new(regularized).expect("ridge-regularized matrix is positive definite");
                (chol, true)
            }
        };
        let projector = Self {
            phi,
            outer: chol,
            y: DVector::from_column_slice(y),
        };
        (projector, flagged)
    }

    fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        let w = self.outer.solve(&(self.phi * v - &self.y));
        v - self.phi.tr_mul(&w)
    }
}

pub fn l1_baseline(op: &SensingOperator, y: &[f64], config: &RecoveryConfig) -> Result<RecoveryResult> {
    check_inputs(op, y, config)?;
    let n = op.cols();
    let settings = config.l1;
    if linalg::norm_inf(y) == 0.0 {
        return Ok(finish(op, y, vec![0.0; n], 0, HaltReason::ResidualSmall, false));
    }
    let phi = op.phi().as_nalgebra();
    let (projector, mut flagged) = AffineProjector::new(phi, y);

    let x0 = projector.project(&DVector::zeros(n));
    let penalty = settings
        .penalty
        .unwrap_or_else(|| n as f64 / x0.lp_norm(1).max(f64::MIN_POSITIVE));
    let threshold = 1.0 / penalty;

    let mut z = x0.clone();
    let mut u = DVector::zeros(n);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iterations {
        let x = projector.project(&(&z - &u));
        let shifted = &x + &u;
        let z_next = shifted.map(|v| soft_threshold(v, threshold));
        let primal = (&x - &z_next).norm();
        let dual = (&z_next - &z).norm();
        u = shifted - &z_next;
        z = z_next;
        iterations += 1;
        let scale = x.norm().max(z.norm()).max(f64::MIN_POSITIVE);
        if primal <= settings.tol * scale && dual <= settings.tol * scale {
            converged = true;
            break;
        }
    }

    let phi_t_y = op.phi().adjoint_mul_vec(y);
    let (c_hat, refit_flagged) = k_sparse_output(op, &phi_t_y, z.as_slice(), config);
    flagged |= refit_flagged;
    let residual = linalg::norm2(&op.residual(y, &c_hat));
    let halt = if residual <= config.residual_tol * linalg::norm2(y) {
        HaltReason::ResidualSmall
    } else if converged {
        HaltReason::SupportStable
    } else {
        HaltReason::MaxIterations
    };
    Ok(finish(op, y, c_hat, iterations, halt, flagged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{block_correlated_ensemble, gaussian_ensemble};
    use crate::linalg::DenseMatrix;

    fn mse(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
    }

    #[test]
    fn zero_measurements() {
        let p = gaussian_ensemble(30, 60, 2, 0).unwrap();
        let op = SensingOperator::new(p.phi);
        let res = l1_baseline(&op, &[0.0; 30], &RecoveryConfig::new(2)).unwrap();
        assert!(res.c_hat.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn orthonormal_operator_is_exact() {
        let op = SensingOperator::new(DenseMatrix::identity(20));
        let mut c = vec![0.0; 20];
        c[4] = 0.7;
        c[11] = -1.3;
        c[19] = 0.2;
        let res = l1_baseline(&op, &c, &RecoveryConfig::new(3)).unwrap();
        for (a, b) in res.c_hat.iter().zip(&c) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(res.halt_reason, HaltReason::ResidualSmall);
    }

    #[test]
    fn single_spike_at_high_sampling() {
        let mut ok = 0;
        for seed in 0..25 {
            let p = gaussian_ensemble(230, 256, 1, seed).unwrap();
            let op = SensingOperator::new(p.phi.clone());
            let res = l1_baseline(&op, &p.y, &RecoveryConfig::new(1)).unwrap();
            if mse(&res.c_hat, &p.c_true) < 1e-5 {
                ok += 1;
            }
        }
        assert!(ok >= 24, "{ok}/25");
    }

    #[test]
    fn iterate_satisfies_the_constraint() {
        let p = gaussian_ensemble(40, 100, 4, 3).unwrap();
        let phi = p.phi.as_nalgebra();
        let (proj, flagged) = AffineProjector::new(phi, &p.y);
        assert!(!flagged);
        let v = proj.project(&DVector::from_fn(100, |i, _| (i as f64).sin()));
        let r = phi * &v - DVector::from_column_slice(&p.y);
        assert!(r.amax() < 1e-10);
    }

    #[test]
    fn coherent_blocks_are_recovered() {
        let mut ok = 0;
        for seed in 0..10 {
            let p = block_correlated_ensemble(230, 256, 23, seed).unwrap();
            let op = SensingOperator::new(p.phi.clone());
            let res = l1_baseline(&op, &p.y, &RecoveryConfig::new(23)).unwrap();
            ok += usize::from(mse(&res.c_hat, &p.c_true) < 1e-5);
        }
        assert!(ok >= 9, "{ok}/10");
    }

    #[test]
    fn soft_threshold_shrinks_toward_zero() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
    }
}
