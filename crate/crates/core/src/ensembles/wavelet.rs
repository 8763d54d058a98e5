//! Two-dimensional Daubechies wavelet basis on a periodic square patch,
//! blur-and-sample sensing operator, and the quadtree partition of the
//! coefficients.
//!
//! Coefficients use the usual pyramid layout on the `size x size` grid: after
//! `levels` steps the approximation sits in the top-left corner and the detail
//! bands of side `b` occupy `[0,b)x[b,2b)`, `[b,2b)x[0,b)` and `[b,2b)x[b,2b)`.
//! Coefficient `(r, c)` is column `r * size + c` of the basis, and pixel
//! `(r, c)` is row `r * size + c`.

use std::sync::OnceLock;

use super::{sample_sorted, standard_normal, SamplingPattern, SetPartition, SparseProblem};
use crate::error::{invalid, Result};
use crate::linalg::{DenseMatrix, IndexSet};
use crate::seed;

pub const PATCH_SIZE: usize = 32;
pub const PATCH_LEVELS: usize = 5;
/// Coefficients per tree: one root, four children, sixteen grandchildren.
pub const TREE_SIZE: usize = 21;
pub const BLUR_CENTER: f64 = 0.29;
pub const BLUR_OFF_CENTER: f64 = 0.02;

/// Daubechies scaling filter with five vanishing moments (10 taps).
pub const DB5_LOWPASS: [f64; 10] = [
    0.160_102_397_974_192_93,
    0.603_829_269_797_189_6,
    0.724_308_528_437_772_9,
    0.138_428_145_901_320_74,
    -0.242_294_887_066_382_03,
    -0.032_244_869_584_638_375,
    0.077_571_493_840_045_72,
    -0.006_241_490_212_798_274,
    -0.012_580_751_999_081_999,
    0.003_335_725_285_473_771_2,
];

fn highpass() -> [f64; 10] {
    let mut g = [0.0; 10];
    for (m, v) in g.iter_mut().enumerate() {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        *v = sign * DB5_LOWPASS[9 - m];
    }
    g
}

fn analyze(x: &[f64], out: &mut [f64], g: &[f64; 10]) {
    let n = x.len();
    let half = n / 2;
    for k in 0..half {
        let (mut a, mut d) = (0.0, 0.0);
        for (m, (&h, &gm)) in DB5_LOWPASS.iter().zip(g).enumerate() {
            let v = x[(2 * k + m) % n];
            a += h * v;
            d += gm * v;
        }
        out[k] = a;
        out[half + k] = d;
    }
}

fn synthesize(x: &[f64], out: &mut [f64], g: &[f64; 10]) {
    let n = x.len();
    let half = n / 2;
    out.iter_mut().for_each(|v| *v = 0.0);
    for k in 0..half {
        let (a, d) = (x[k], x[half + k]);
        for (m, (&h, &gm)) in DB5_LOWPASS.iter().zip(g).enumerate() {
            out[(2 * k + m) % n] += h * a + gm * d;
        }
    }
}

fn check_levels(size: usize, levels: usize) -> Result<()> {
    if size < 2 || !size.is_power_of_two() {
        return invalid(format!("patch size must be a power of two, got {size}"));
    }
    if levels == 0 || size >> levels == 0 {
        return invalid(format!("{levels} levels do not fit a {size}x{size} patch"));
    }
    Ok(())
}

/// Apply `step` to rows then columns (or columns then rows when `inverse`)
/// of the top-left `side x side` block.
fn transform_block(
    data: &mut [f64],
    size: usize,
    side: usize,
    inverse: bool,
    step: impl Fn(&[f64], &mut [f64]),
) {
    let mut line = vec![0.0; side];
    let mut out = vec![0.0; side];
    let mut rows = |data: &mut [f64]| {
        for r in 0..side {
            line.copy_from_slice(&data[r * size..r * size + side]);
            step(&line, &mut out);
            data[r * size..r * size + side].copy_from_slice(&out);
        }
    };
    let mut line_c = vec![0.0; side];
    let mut out_c = vec![0.0; side];
    let mut cols = |data: &mut [f64]| {
        for c in 0..side {
            for r in 0..side {
                line_c[r] = data[r * size + c];
            }
            step(&line_c, &mut out_c);
            for r in 0..side {
                data[r * size + c] = out_c[r];
            }
        }
    };
    if inverse {
        cols(data);
        rows(data);
    } else {
        rows(data);
        cols(data);
    }
}

/// Periodic multi-level 2-D analysis of a row-major `size x size` image.
pub fn dwt2_forward(image: &[f64], size: usize, levels: usize) -> Result<Vec<f64>> {
    check_levels(size, levels)?;
    if image.len() != size * size {
        return invalid("image length does not match patch size");
    }
    let g = highpass();
    let mut data = image.to_vec();
    for level in 0..levels {
        transform_block(&mut data, size, size >> level, false, |x, o| analyze(x, o, &g));
    }
    Ok(data)
}

/// Inverse of [`dwt2_forward`].
pub fn dwt2_inverse(coeffs: &[f64], size: usize, levels: usize) -> Result<Vec<f64>> {
    check_levels(size, levels)?;
    if coeffs.len() != size * size {
        return invalid("coefficient length does not match patch size");
    }
    let g = highpass();
    let mut data = coeffs.to_vec();
    for level in (0..levels).rev() {
        transform_block(&mut data, size, size >> level, true, |x, o| synthesize(x, o, &g));
    }
    Ok(data)
}

/// Synthesis matrix: column `j` is the image of the unit coefficient `j`.
pub fn wavelet_basis_2d(size: usize, levels: usize) -> Result<DenseMatrix> {
    check_levels(size, levels)?;
    let n = size * size;
    let mut psi = DenseMatrix::zeros(n, n);
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        let atom = dwt2_inverse(&unit, size, levels)?;
        psi.column_mut(j).copy_from_slice(&atom);
        unit[j] = 0.0;
    }
    Ok(psi)
}

fn default_basis() -> &'static DenseMatrix {
    static BASIS: OnceLock<DenseMatrix> = OnceLock::new();
    BASIS.get_or_init(|| {
        wavelet_basis_2d(PATCH_SIZE, PATCH_LEVELS).expect("default patch geometry is valid")
    })
}

/// 5x5 kernel with `center` in the middle and `off` everywhere else.
pub fn blur_kernel(center: f64, off: f64) -> [[f64; 5]; 5] {
    let mut k = [[off; 5]; 5];
    k[2][2] = center;
    k
}

/// Circular 2-D convolution of a row-major `size x size` image.
pub fn blur_periodic(image: &[f64], size: usize, kernel: &[[f64; 5]; 5]) -> Vec<f64> {
    assert_eq!(image.len(), size * size);
    let mut out = vec![0.0; size * size];
    for r in 0..size {
        for c in 0..size {
            let mut acc = 0.0;
            for (dr, krow) in kernel.iter().enumerate() {
                let rr = (r + 2 * size - dr + 2) % size;
                for (dc, &k) in krow.iter().enumerate() {
                    let cc = (c + 2 * size - dc + 2) % size;
                    acc += k * image[rr * size + cc];
                }
            }
            out[r * size + c] = acc;
        }
    }
    out
}

/// Set 0 is the `size/8` square of coarsest coefficients; every other set is
/// a three-level quadtree rooted at one coefficient of the detail bands of
/// side `size/8`, ordered by band then row-major position.
pub fn quadtree_partition(size: usize) -> Result<SetPartition> {
    if size < 8 || !size.is_power_of_two() {
        return invalid(format!("quadtree partition needs a power-of-two size >= 8, got {size}"));
    }
    let root = size / 8;
    let at = |r: usize, c: usize| r * size + c;
    let mut sets = Vec::with_capacity(1 + 3 * root * root);
    sets.push(IndexSet::new(
        (0..root).flat_map(|r| (0..root).map(move |c| at(r, c))),
        size * size,
    )?);
    let bands = [(0, 1), (1, 0), (1, 1)];
    for (br, bc) in bands {
        for i in 0..root {
            for j in 0..root {
                let mut tree = vec![at(br * root + i, bc * root + j)];
                for depth in 1..=2 {
                    let side = root << depth;
                    let span = 1 << depth;
                    for a in 0..span {
                        for b in 0..span {
                            tree.push(at(br * side + span * i + a, bc * side + span * j + b));
                        }
                    }
                }
                sets.push(IndexSet::new(tree, size * size)?);
            }
        }
    }
    SetPartition::new(sets, size * size)
}

/// Blur, sample and wavelet-synthesis composed into one sensing matrix.
#[derive(Clone, Debug)]
pub struct WaveletOperator {
    pub phi: DenseMatrix,
    pub partition: SetPartition,
    pub pattern: SamplingPattern,
    /// Row-major pixel index of each measurement.
    pub sampled_pixels: Vec<usize>,
}

/// `Phi = S H Psi` on the 32x32 patch. Columns are not renormalized.
pub fn wavelet_tree_operator(
    pattern: &SamplingPattern,
    blur_center: f64,
    blur_off: f64,
) -> Result<WaveletOperator> {
    if !(blur_center.is_finite() && blur_off.is_finite()) {
        return invalid("blur weights must be finite");
    }
    let psi = default_basis();
    let kernel = blur_kernel(blur_center, blur_off);
    let sampled_pixels: Vec<usize> = pattern
        .tiled(PATCH_SIZE)
        .iter()
        .enumerate()
        .filter(|(_, on)| **on)
        .map(|(p, _)| p)
        .collect();
    let n = PATCH_SIZE * PATCH_SIZE;
    let mut phi = DenseMatrix::zeros(sampled_pixels.len(), n);
    for j in 0..n {
        let blurred = blur_periodic(psi.column(j), PATCH_SIZE, &kernel);
        for (dst, &p) in phi.column_mut(j).iter_mut().zip(&sampled_pixels) {
            *dst = blurred[p];
        }
    }
    Ok(WaveletOperator {
        phi,
        partition: quadtree_partition(PATCH_SIZE)?,
        pattern: *pattern,
        sampled_pixels,
    })
}

/// Signal supported on `tree_count` trees chosen uniformly from sets
/// `1..partition.len()`, with i.i.d. N(0,1) values on every tree coefficient.
pub fn tree_sparse_signal(partition: &SetPartition, tree_count: usize, seed: u64) -> Result<Vec<f64>> {
    let trees = partition.len().saturating_sub(1);
    if tree_count == 0 || tree_count > trees {
        return invalid(format!("tree count must be in 1..={trees}, got {tree_count}"));
    }
    let mut rng = seed::rng(seed);
    let mut c = vec![0.0; partition.columns()];
    for t in sample_sorted(&mut rng, trees, tree_count) {
        for i in partition.set(t + 1) {
            c[i] = standard_normal(&mut rng);
        }
    }
    Ok(c)
}

/// Noiseless trial on a prebuilt operator.
pub fn wavelet_tree_problem(op: &WaveletOperator, tree_count: usize, seed: u64) -> Result<SparseProblem> {
    let c_true = tree_sparse_signal(&op.partition, tree_count, seed)?;
    let y = op.phi.mul_vec(&c_true);
    let sparsity = c_true.iter().filter(|v| **v != 0.0).count();
    Ok(SparseProblem {
        phi: op.phi.clone(),
        y,
        c_true,
        sparsity,
        partition: Some(op.partition.clone()),
        seed,
    })
}
