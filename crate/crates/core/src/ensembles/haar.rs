//! One-dimensional Haar basis and the filter-then-decimate operator.

use crate::error::{invalid, Result};
use crate::linalg::DenseMatrix;

/// Symmetric five-tap smoothing kernel used for the 1-D correlation demo.
pub const SMOOTHING_KERNEL: [f64; 5] = [0.1, 0.2, 0.4, 0.2, 0.1];

/// Orthonormal Haar basis of length `n` (columns). Column 0 is the constant
/// scaling function; column `2^j + k` is the wavelet at scale `j` (0 is the
/// coarsest) and position `k`.
pub fn haar_basis(n: usize) -> Result<DenseMatrix> {
    if n < 2 || !n.is_power_of_two() {
        return invalid(format!("Haar basis length must be a power of two >= 2, got {n}"));
    }
    let mut psi = DenseMatrix::zeros(n, n);
    let c = 1.0 / (n as f64).sqrt();
    psi.column_mut(0).iter_mut().for_each(|v| *v = c);
    let mut scale = 1;
    while scale < n {
        let width = n / scale;
        let amp = 1.0 / (width as f64).sqrt();
        for k in 0..scale {
            let col = psi.column_mut(scale + k);
            let start = k * width;
            col[start..start + width / 2].iter_mut().for_each(|v| *v = amp);
            col[start + width / 2..start + width].iter_mut().for_each(|v| *v = -amp);
        }
        scale *= 2;
    }
    Ok(psi)
}

/// `S H`: row `r` holds `kernel` centred on sample `decimation * r`, with
/// circular wraparound.
pub fn filter_downsample_operator(n: usize, kernel: &[f64], decimation: usize) -> Result<DenseMatrix> {
    if kernel.is_empty() || kernel.len() % 2 == 0 {
        return invalid(format!("kernel length must be odd, got {}", kernel.len()));
    }
    if decimation == 0 || n % decimation != 0 {
        return invalid(format!("decimation {decimation} must divide N={n}"));
    }
    if kernel.len() > n {
        return invalid("kernel is longer than the signal");
    }
    let rows = n / decimation;
    let half = kernel.len() / 2;
    let mut sh = DenseMatrix::zeros(rows, n);
    for r in 0..rows {
        let centre = decimation * r;
        for (t, &h) in kernel.iter().enumerate() {
            let col = (centre + n + t - half) % n;
            sh.column_mut(col)[r] += h;
        }
    }
    Ok(sh)
}

/// `Phi = S H Psi` for the Haar basis.
pub fn haar_filter_operator(n: usize, kernel: &[f64], decimation: usize) -> Result<DenseMatrix> {
    let psi = haar_basis(n)?;
    filter_downsample_operator(n, kernel, decimation)?.matmul(&psi)
}
