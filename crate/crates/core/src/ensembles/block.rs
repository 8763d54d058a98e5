use std::ops::Range;

use super::{sample_sorted, standard_normal, SetPartition, SparseProblem};
use crate::error::{invalid, Result};
use crate::linalg::DenseMatrix;
use crate::seed;

pub const BLOCK_SUBSETS: usize = 16;
pub const BLOCK_NOISE_VARIANCE: f64 = 0.0025;

/// Subsets that receive nonzeros before any leftover goes to a fifth one.
const ACTIVE_SUBSETS: usize = 4;

/// Row range owned by each column subset. When `m` is not a multiple of the
/// subset count the first `m % subsets` subsets get one extra row.
pub fn block_row_ranges(m: usize, subsets: usize) -> Vec<Range<usize>> {
    let base = m / subsets;
    let extra = m % subsets;
    let mut start = 0;
    (0..subsets)
        .map(|b| {
            let len = base + usize::from(b < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// 0/1 block-diagonal skeleton: ones where subset rows meet subset columns.
pub fn block_skeleton(m: usize, n: usize) -> Result<DenseMatrix> {
    if n % BLOCK_SUBSETS != 0 || n == 0 {
        return invalid(format!("N={n} is not a positive multiple of {BLOCK_SUBSETS}"));
    }
    if m < BLOCK_SUBSETS {
        return invalid(format!("block ensemble needs M >= {BLOCK_SUBSETS}, got {m}"));
    }
    let width = n / BLOCK_SUBSETS;
    let rows = block_row_ranges(m, BLOCK_SUBSETS);
    Ok(DenseMatrix::from_fn(m, n, |i, j| {
        if rows[j / width].contains(&i) {
            1.0
        } else {
            0.0
        }
    }))
}

/// Block-correlated ensemble with the standard noise variance of 0.0025.
pub fn block_correlated_ensemble(m: usize, n: usize, k: usize, seed: u64) -> Result<SparseProblem> {
    block_correlated_ensemble_with(m, n, k, BLOCK_NOISE_VARIANCE, seed)
}

/// Sixteen column subsets, each with its own band of rows set to one, plus
/// i.i.d. N(0, `noise_variance`) on every entry, then unit-norm columns.
/// The signal puts `K/4` nonzeros in each of four random subsets and any
/// remainder in a fifth.
pub fn block_correlated_ensemble_with(
    m: usize,
    n: usize,
    k: usize,
    noise_variance: f64,
    seed: u64,
) -> Result<SparseProblem> {
    if !(0 < k && k < m) {
        return invalid(format!("block ensemble needs 0 < K < M, got K={k} M={m}"));
    }
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return invalid(format!("noise variance must be non-negative, got {noise_variance}"));
    }
    let mut phi = block_skeleton(m, n)?;
    let width = n / BLOCK_SUBSETS;
    let per_subset = k / ACTIVE_SUBSETS;
    let leftover = k - ACTIVE_SUBSETS * per_subset;
    if per_subset > width || leftover > width {
        return invalid(format!(
            "K={k} needs {per_subset} nonzeros per subset but subsets hold {width} columns"
        ));
    }

    let mut rng = seed::rng(seed);
    let sd = noise_variance.sqrt();
    for j in 0..n {
        for v in phi.column_mut(j) {
            *v += sd * standard_normal(&mut rng);
        }
    }
    phi.normalize_columns();

    let mut chosen: Vec<(usize, usize)> = rand::seq::index::sample(&mut rng, BLOCK_SUBSETS, ACTIVE_SUBSETS)
        .into_iter()
        .map(|b| (b, per_subset))
        .collect();
    if leftover > 0 {
        let rest: Vec<usize> = (0..BLOCK_SUBSETS)
            .filter(|b| !chosen.iter().any(|(c, _)| c == b))
            .collect();
        let pick = rest[rand::seq::index::sample(&mut rng, rest.len(), 1).index(0)];
        chosen.push((pick, leftover));
    }

    let mut c_true = vec![0.0; n];
    for (b, count) in chosen {
        for offset in sample_sorted(&mut rng, width, count) {
            c_true[b * width + offset] = standard_normal(&mut rng);
        }
    }
    let y = phi.mul_vec(&c_true);
    Ok(SparseProblem {
        phi,
        y,
        c_true,
        sparsity: k,
        partition: Some(SetPartition::contiguous(n, BLOCK_SUBSETS)?),
        seed,
    })
}
