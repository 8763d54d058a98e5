//! Set-scored selection for signals concentrated on column subsets.

use super::partinv::partial_inversion;
use super::{check_inputs, RecoveryConfig, RecoveryResult, SensingOperator};
use crate::ensembles::SetPartition;
use crate::error::{invalid, Result};
use crate::linalg::IndexSet;

/// `s_j = sum over l in I_j of |z_l|`.
///
/// Panics if `z` does not cover the partition's columns.
pub fn tree_scores(z: &[f64], partition: &SetPartition) -> Vec<f64> {
    assert_eq!(z.len(), partition.columns(), "scores need one entry per partitioned column");
    partition
        .sets()
        .iter()
        .map(|set| set.iter().map(|i| z[i].abs()).sum())
        .collect()
}

/// Union of whole sets, taken in decreasing score order (lower index first on
/// ties), until at least `k` columns are included.
pub fn select_sets(scores: &[f64], partition: &SetPartition, k: usize) -> IndexSet {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut selected = IndexSet::default();
    for s in order {
        if selected.len() >= k {
            break;
        }
        selected = selected.union(partition.set(s));
    }
    selected
}

/// Partial inversion where the inverted set is always a union of partition
/// sets, chosen by summed proxy magnitude.
pub fn partinv_wavelet(
    op: &SensingOperator,
    y: &[f64],
    partition: &SetPartition,
    config: &RecoveryConfig,
) -> Result<RecoveryResult> {
    check_inputs(op, y, config)?;
    if partition.columns() != op.cols() {
        return invalid(format!(
            "partition covers {} columns, operator has {}",
            partition.columns(),
            op.cols()
        ));
    }
    let k = config.sparsity;
    Ok(partial_inversion(op, y, config, |estimate| {
        select_sets(&tree_scores(estimate, partition), partition, k)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::quadtree_partition;
    use crate::linalg::DenseMatrix;
    use crate::recovery::HaltReason;

    #[test]
    fn zero_input_scores_zero() {
        let p = quadtree_partition(32).unwrap();
        assert!(tree_scores(&[0.0; 1024], &p).iter().all(|s| *s == 0.0));
    }

    #[test]
    fn indicator_of_one_tree() {
        let p = quadtree_partition(32).unwrap();
        let mut z = vec![0.0; 1024];
        for i in p.set(7) {
            z[i] = 1.0;
        }
        let s = tree_scores(&z, &p);
        assert_eq!(s[7], 21.0);
        assert_eq!(s.iter().sum::<f64>(), 21.0);
    }

    #[test]
    fn ties_prefer_lower_set() {
        let p = quadtree_partition(32).unwrap();
        let mut z = vec![0.0; 1024];
        for i in p.set(5).iter().chain(p.set(3).iter()) {
            z[i] = -1.0;
        }
        let chosen = select_sets(&tree_scores(&z, &p), &p, 21);
        assert_eq!(&chosen, p.set(3));
        let both = select_sets(&tree_scores(&z, &p), &p, 22);
        assert_eq!(both, p.set(3).union(p.set(5)));
    }

    #[test]
    fn exact_on_selected_trees() {
        let n = 64;
        let partition = SetPartition::contiguous(n, 8).unwrap();
        let mut c = vec![0.0; n];
        for i in 16..24 {
            c[i] = (i as f64 - 19.5) * 0.3;
        }
        let op = SensingOperator::new(DenseMatrix::identity(n));
        let res = partinv_wavelet(&op, &c, &partition, &RecoveryConfig::new(8)).unwrap();
        assert_eq!(res.iterations, 1);
        assert_eq!(res.halt_reason, HaltReason::ResidualSmall);
        for (a, b) in res.c_hat.iter().zip(&c) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
