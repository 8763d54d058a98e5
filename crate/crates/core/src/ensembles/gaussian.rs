use super::{sample_sorted, standard_normal, SparseProblem};
use crate::error::{invalid, Result};
use crate::linalg::DenseMatrix;
use crate::seed;

/// I.i.d. N(0,1) matrix with unit-norm columns and a uniformly placed
/// K-sparse N(0,1) signal. Noiseless.
pub fn gaussian_ensemble(m: usize, n: usize, k: usize, seed: u64) -> Result<SparseProblem> {
    if !(0 < k && k < m && m <= n) {
        return invalid(format!("gaussian ensemble needs 0 < K < M <= N, got K={k} M={m} N={n}"));
    }
    let mut rng = seed::rng(seed);
    let data = (0..m * n).map(|_| standard_normal(&mut rng)).collect();
    let mut phi = DenseMatrix::new(m, n, data)?;
    phi.normalize_columns();

    let mut c_true = vec![0.0; n];
    for i in sample_sorted(&mut rng, n, k) {
        c_true[i] = standard_normal(&mut rng);
    }
    let y = phi.mul_vec(&c_true);
    Ok(SparseProblem {
        phi,
        y,
        c_true,
        sparsity: k,
        partition: None,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn columns_have_unit_norm() {
        let m = 128;
        let p = gaussian_ensemble(m, 256, m / 10, 42).unwrap();
        for j in 0..256 {
            assert!((p.phi.column_norm(j) - 1.0).abs() < 1e-12);
        }
        assert_eq!(p.support().len(), 12);
    }

    #[test]
    fn single_spike() {
        let p = gaussian_ensemble(20, 40, 1, 1).unwrap();
        assert_eq!(p.c_true.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn measurements_match_signal() {
        let p = gaussian_ensemble(30, 60, 5, 8).unwrap();
        let y = p.phi.mul_vec(&p.c_true);
        assert_eq!(y, p.y);
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = gaussian_ensemble(64, 128, 8, 99).unwrap();
        let b = gaussian_ensemble(64, 128, 8, 99).unwrap();
        assert_eq!(a.phi, b.phi);
        assert_eq!(a.c_true, b.c_true);
        assert_eq!(a.y, b.y);
        let c = gaussian_ensemble(64, 128, 8, 100).unwrap();
        assert_ne!(a.c_true, c.c_true);
    }

    #[test]
    fn rejects_k_not_below_m() {
        assert!(gaussian_ensemble(10, 20, 10, 0).is_err());
        assert!(gaussian_ensemble(10, 20, 0, 0).is_err());
        assert!(gaussian_ensemble(30, 20, 2, 0).is_err());
    }
}
