use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::{factor, submatrix_columns, DenseMatrix, IndexSet};

/// Noise terms of the two estimators of `c_I`, for a known `c`.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimatorNoise {
    /// `(Phi_I* Phi_I)^-1 Phi_I* Phi_J c_J`: error of `Phi_I^dagger y`.
    pub partinv_noise: Vec<f64>,
    /// `(Phi_I* Phi_I - Id) c_I`: interference among the columns of `I`.
    pub cosamp_self_noise: Vec<f64>,
    /// `Phi_I* Phi_J c_J`: leakage from outside `I`.
    pub cosamp_cross_noise: Vec<f64>,
}

/// Splits `Phi_I^dagger y` and `Phi_I* y` into signal plus noise for
/// `y = Phi c` (`J` is the complement of `I`).
pub fn estimator_decomposition(phi: &DenseMatrix, c: &[f64], index: &IndexSet) -> Result<EstimatorNoise> {
    if c.len() != phi.cols() {
        return invalid(format!(
            "signal has length {}, operator has {} columns",
            c.len(),
            phi.cols()
        ));
    }
    let phi_i = submatrix_columns(phi, index)?;
    let a = phi_i.as_nalgebra();
    let gram: DMatrix<f64> = a.tr_mul(a);
    let c_i = DVector::from_iterator(index.len(), index.iter().map(|i| c[i]));

    let mut outside = c.to_vec();
    for i in index {
        outside[i] = 0.0;
    }
    let leak = DVector::from_vec(phi.mul_vec(&outside));
    let cross = a.tr_mul(&leak);

    let self_noise = &gram * &c_i - &c_i;
    let chol = factor(gram)
        .ok_or_else(|| Error::RankDeficient(format!("Phi_I with {} columns", index.len())))?;
    let partinv_noise = chol.solve(&cross);

    Ok(EstimatorNoise {
        partinv_noise: partinv_noise.as_slice().to_vec(),
        cosamp_self_noise: self_noise.as_slice().to_vec(),
        cosamp_cross_noise: cross.as_slice().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::gaussian_ensemble;
    use crate::linalg::{least_squares, SolveMethod};

    #[test]
    fn support_inside_set_has_no_partinv_noise() {
        let p = gaussian_ensemble(40, 80, 5, 2).unwrap();
        let mut idx: Vec<usize> = p.support().iter().collect();
        idx.extend([0, 1, 2, 3, 4, 5, 6]);
        idx.sort_unstable();
        idx.dedup();
        let set = IndexSet::new(idx, 80).unwrap();
        let d = estimator_decomposition(&p.phi, &p.c_true, &set).unwrap();
        assert!(d.partinv_noise.iter().all(|v| *v == 0.0));
        assert!(d.cosamp_cross_noise.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn orthonormal_has_no_self_noise() {
        let phi = DenseMatrix::identity(10);
        let c: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let set = IndexSet::new([1, 4, 7], 10).unwrap();
        let d = estimator_decomposition(&phi, &c, &set).unwrap();
        assert!(d.cosamp_self_noise.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn pseudo_inverse_estimate_is_signal_plus_noise() {
        let p = gaussian_ensemble(64, 128, 8, 77).unwrap();
        let set = crate::recovery::largest_magnitudes(&p.phi.adjoint_mul_vec(&p.y), 16);
        let d = estimator_decomposition(&p.phi, &p.c_true, &set).unwrap();
        let est = least_squares(&submatrix_columns(&p.phi, &set).unwrap(), &p.y, SolveMethod::Direct).unwrap();
        for (k, i) in set.iter().enumerate() {
            assert!((est.x[k] - (p.c_true[i] + d.partinv_noise[k])).abs() < 1e-8);
        }
    }

    #[test]
    fn rank_deficient_is_an_error() {
        let phi = DenseMatrix::new(2, 3, vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0]).unwrap();
        let set = IndexSet::new([0, 1], 3).unwrap();
        assert!(matches!(
            estimator_decomposition(&phi, &[1.0, 1.0, 1.0], &set),
            Err(Error::RankDeficient(_))
        ));
    }
}
