//! Sensing matrices, bases and ground-truth signal generators.
//!
//! Every generator is a pure function of its parameters and seed.

mod block;
mod gaussian;
mod haar;
mod pattern;
mod wavelet;

pub use block::{
    block_correlated_ensemble, block_correlated_ensemble_with, block_row_ranges, block_skeleton,
    BLOCK_NOISE_VARIANCE, BLOCK_SUBSETS,
};
pub use gaussian::gaussian_ensemble;
pub use haar::{filter_downsample_operator, haar_basis, haar_filter_operator, SMOOTHING_KERNEL};
pub use pattern::SamplingPattern;
pub use wavelet::{
    blur_kernel, blur_periodic, dwt2_forward, dwt2_inverse, quadtree_partition, tree_sparse_signal,
    wavelet_basis_2d, wavelet_tree_operator, wavelet_tree_problem, WaveletOperator, BLUR_CENTER,
    BLUR_OFF_CENTER, DB5_LOWPASS, PATCH_LEVELS, PATCH_SIZE, TREE_SIZE,
};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::{DenseMatrix, IndexSet};

/// One recovery trial: `y = phi * c_true`.
#[derive(Clone, Debug)]
pub struct SparseProblem {
    pub phi: DenseMatrix,
    pub y: Vec<f64>,
    pub c_true: Vec<f64>,
    pub sparsity: usize,
    pub partition: Option<SetPartition>,
    pub seed: u64,
}

impl SparseProblem {
    pub fn rows(&self) -> usize {
        self.phi.rows()
    }

    pub fn cols(&self) -> usize {
        self.phi.cols()
    }

    pub fn support(&self) -> IndexSet {
        IndexSet::from_sorted(
            self.c_true
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }
}

/// Disjoint cover of `{0, .., n-1}` by column subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPartition {
    sets: Vec<IndexSet>,
    owner: Vec<usize>,
}

impl SetPartition {
    pub fn new(sets: Vec<IndexSet>, n: usize) -> Result<Self> {
        let mut owner = vec![usize::MAX; n];
        for (s, set) in sets.iter().enumerate() {
            if set.is_empty() {
                return invalid(format!("partition set {s} is empty"));
            }
            for i in set {
                if i >= n {
                    return invalid(format!("partition index {i} out of range for {n} columns"));
                }
                if owner[i] != usize::MAX {
                    return invalid(format!("column {i} appears in sets {} and {s}", owner[i]));
                }
                owner[i] = s;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return invalid(format!("column {i} is not covered by the partition"));
        }
        Ok(Self { sets, owner })
    }

    /// `count` consecutive blocks of equal width.
    pub fn contiguous(n: usize, count: usize) -> Result<Self> {
        if count == 0 || n % count != 0 {
            return invalid(format!("{n} columns cannot be split into {count} equal blocks"));
        }
        let width = n / count;
        let sets = (0..count)
            .map(|b| IndexSet::from_sorted((b * width..(b + 1) * width).collect()))
            .collect();
        Self::new(sets, n)
    }

    pub fn sets(&self) -> &[IndexSet] {
        &self.sets
    }

    pub fn set(&self, index: usize) -> &IndexSet {
        &self.sets[index]
    }

    /// Number of sets (SETNUM).
    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Number of columns covered.
    pub fn columns(&self) -> usize {
        self.owner.len()
    }

    pub fn owner_of(&self, column: usize) -> usize {
        self.owner[column]
    }
}

pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Picks `k` distinct indices from `0..n`, sorted.
pub(crate) fn sample_sorted<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<usize> {
    let mut idx = rand::seq::index::sample(rng, n, k).into_vec();
    idx.sort_unstable();
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_rejects_overlap_and_gaps() {
        let a = IndexSet::new([0, 1], 4).unwrap();
        let b = IndexSet::new([1, 2, 3], 4).unwrap();
        assert!(SetPartition::new(vec![a.clone(), b], 4).is_err());
        let c = IndexSet::new([2], 4).unwrap();
        assert!(SetPartition::new(vec![a.clone(), c.clone()], 4).is_err());
        let d = IndexSet::new([2, 3], 4).unwrap();
        let p = SetPartition::new(vec![a, d], 4).unwrap();
        assert_eq!(p.owner_of(3), 1);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn contiguous_blocks() {
        let p = SetPartition::contiguous(256, 16).unwrap();
        assert_eq!(p.len(), 16);
        assert!(p.sets().iter().all(|s| s.len() == 16));
        assert_eq!(p.owner_of(17), 1);
        assert!(SetPartition::contiguous(250, 16).is_err());
    }
}
