//! Dense linear algebra used by the generators and the recovery algorithms.
//!
//! Matrices are stored column-major in double precision. Storage and the
//! factorizations are delegated to `nalgebra`; this module only exposes the
//! handful of operations the rest of the crate needs, plus least-squares
//! solves on column subsets through the normal equations.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{invalid, Error, Result};

/// Relative ridge weight used when the normal equations cannot be factored.
pub const RIDGE_EPSILON: f64 = 1e-10;

/// Pivot ratio (squared) above which a Cholesky factor is treated as singular.
const MAX_PIVOT_RATIO_SQ: f64 = 1e13;

const POWER_STEPS: usize = 30;

/// Column-major real matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    inner: DMatrix<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from column-major data.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return invalid(format!("matrix dimensions must be positive, got {rows}x{cols}"));
        }
        if data.len() != rows * cols {
            return invalid(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            ));
        }
        Ok(Self {
            inner: DMatrix::from_vec(rows, cols, data),
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            inner: DMatrix::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "matrix dimensions must be positive");
        Self {
            inner: DMatrix::identity(n, n),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            inner: DMatrix::from_fn(rows, cols, f),
        }
    }

    pub(crate) fn from_nalgebra(inner: DMatrix<f64>) -> Self {
        debug_assert!(inner.nrows() > 0 && inner.ncols() > 0);
        Self { inner }
    }

    pub(crate) fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    /// Column-major view of all entries.
    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn column(&self, col: usize) -> &[f64] {
        let rows = self.rows();
        &self.inner.as_slice()[col * rows..(col + 1) * rows]
    }

    pub fn column_mut(&mut self, col: usize) -> &mut [f64] {
        let rows = self.rows();
        &mut self.inner.as_mut_slice()[col * rows..(col + 1) * rows]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.inner.row(row).iter().copied().collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        Self::from_nalgebra(self.inner.transpose())
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols(), "vector length must match column count");
        let mut out = vec![0.0; self.rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.column(j)) {
                *o += a * xj;
            }
        }
        out
    }

    /// `A* y`.
    pub fn adjoint_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows(), "vector length must match row count");
        (0..self.cols()).map(|j| dot(self.column(j), y)).collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols() != other.rows() {
            return invalid(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            ));
        }
        Ok(Self::from_nalgebra(&self.inner * &other.inner))
    }

    /// `A* A`.
    pub fn gram(&self) -> DenseMatrix {
        Self::from_nalgebra(self.inner.tr_mul(&self.inner))
    }

    pub fn column_norm(&self, col: usize) -> f64 {
        norm2(self.column(col))
    }

    /// Scales every column to unit Euclidean norm. Zero columns are left alone.
    pub fn normalize_columns(&mut self) {
        for j in 0..self.cols() {
            let n = self.column_norm(j);
            if n > 0.0 {
                self.column_mut(j).iter_mut().for_each(|v| *v /= n);
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.as_slice().iter().all(|v| v.is_finite())
    }

    /// Square submatrix `A[I, I]`.
    pub(crate) fn principal_submatrix(&self, index: &IndexSet) -> DMatrix<f64> {
        let idx = index.as_slice();
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.inner[(idx[i], idx[j])])
    }
}

/// Strictly increasing set of column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct IndexSet {
    indices: Vec<usize>,
}

impl IndexSet {
    /// Builds a set from arbitrary-order indices, all of which must be `< n`.
    pub fn new(indices: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let mut indices: Vec<usize> = indices.into_iter().collect();
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return invalid(format!("duplicate index {}", w[0]));
        }
        if let Some(&last) = indices.last() {
            if last >= n {
                return invalid(format!("index {last} out of range for {n} columns"));
            }
        }
        Ok(Self { indices })
    }

    pub(crate) fn from_sorted(indices: Vec<usize>) -> Self {
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices }
    }

    /// `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    pub fn complement(&self, n: usize) -> IndexSet {
        let mut out = Vec::with_capacity(n.saturating_sub(self.len()));
        let mut it = self.indices.iter().peekable();
        for i in 0..n {
            if it.peek() == Some(&&i) {
                it.next();
            } else {
                out.push(i);
            }
        }
        Self { indices: out }
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (a, b) = (&self.indices, &other.indices);
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                    x
                }
                (Some(&x), Some(&y)) if x < y => {
                    i += 1;
                    x
                }
                (Some(_), Some(&y)) => {
                    j += 1;
                    y
                }
                (Some(&x), None) => {
                    i += 1;
                    x
                }
                (None, Some(&y)) => {
                    j += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        Self { indices: out }
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    pub fn max(&self) -> Option<usize> {
        self.indices.last().copied()
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = usize;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, usize>>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter().copied()
    }
}

/// `A_I`: the columns of `a` listed in `index`, in order.
pub fn submatrix_columns(a: &DenseMatrix, index: &IndexSet) -> Result<DenseMatrix> {
    if index.is_empty() {
        return invalid("column subset is empty");
    }
    if let Some(max) = index.max() {
        if max >= a.cols() {
            return invalid(format!("column {max} out of range for {} columns", a.cols()));
        }
    }
    let mut data = Vec::with_capacity(a.rows() * index.len());
    for j in index {
        data.extend_from_slice(a.column(j));
    }
    DenseMatrix::new(a.rows(), index.len(), data)
}

/// `C_ij = |<phi_i, phi_j>|`.
pub fn correlation_matrix(phi: &DenseMatrix) -> DenseMatrix {
    let mut c = phi.gram();
    c.inner.iter_mut().for_each(|v| *v = v.abs());
    c
}

/// Least-squares solver selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolveMethod {
    /// Cholesky factorization of the normal equations, one refinement step.
    Direct,
    /// `x <- x + omega A*(y - A x)` from `x = 0`. When `omega` is `None` it is
    /// set to `1 / sigma_max(A)^2` from a short power iteration.
    Richardson {
        omega: Option<f64>,
        max_iter: usize,
        tol: f64,
    },
}

impl SolveMethod {
    pub fn richardson() -> Self {
        SolveMethod::Richardson {
            omega: None,
            max_iter: 500,
            tol: 1e-10,
        }
    }
}

impl Default for SolveMethod {
    fn default() -> Self {
        SolveMethod::Direct
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    /// Set when the ridge fallback was used or Richardson did not converge.
    pub flagged: bool,
    pub iterations: usize,
}

/// Minimizes `||A x - y||_2`.
pub fn least_squares(a: &DenseMatrix, y: &[f64], method: SolveMethod) -> Result<LeastSquares> {
    if y.len() != a.rows() {
        return invalid(format!(
            "right-hand side has length {}, matrix has {} rows",
            y.len(),
            a.rows()
        ));
    }
    if a.rows() < a.cols() {
        return invalid(format!(
            "least squares needs rows >= cols, got {}x{}",
            a.rows(),
            a.cols()
        ));
    }
    let gram = a.inner.tr_mul(&a.inner);
    let rhs = a.adjoint_mul_vec(y);
    Ok(solve_gram(gram, &rhs, method))
}

/// Solves `G x = b` for a Gram matrix `G = A* A` and `b = A* y`.
pub fn solve_normal_equations(
    gram: &DenseMatrix,
    rhs: &[f64],
    method: SolveMethod,
) -> Result<LeastSquares> {
    if gram.rows() != gram.cols() || rhs.len() != gram.rows() {
        return invalid("normal equations need a square system matching the right-hand side");
    }
    Ok(solve_gram(gram.inner.clone(), rhs, method))
}

pub(crate) fn solve_gram(gram: DMatrix<f64>, rhs: &[f64], method: SolveMethod) -> LeastSquares {
    match method {
        SolveMethod::Direct => solve_direct(gram, rhs),
        SolveMethod::Richardson {
            omega,
            max_iter,
            tol,
        } => solve_richardson(&gram, rhs, omega, max_iter, tol),
    }
}

pub(crate) fn factor(gram: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let chol = Cholesky::new(gram)?;
    let diag = chol.l_dirty().diagonal();
    let max = diag.max();
    let min = diag.min();
    if !(min > 0.0) || (max / min).powi(2) > MAX_PIVOT_RATIO_SQ {
        return None;
    }
    Some(chol)
}

fn solve_direct(gram: DMatrix<f64>, rhs: &[f64]) -> LeastSquares {
    let n = gram.nrows();
    let b = DVector::from_column_slice(rhs);
    let (system, chol, flagged) = match factor(gram.clone()) {
        Some(chol) => (gram, chol, false),
        None => {
            let trace = gram.trace();
            if !(trace > 0.0) {
                return LeastSquares {
                    x: vec![0.0; n],
                    flagged: true,
                    iterations: 0,
                };
            }
            let ridge = RIDGE_EPSILON * trace / n as f64;
            let mut regularized = gram;
            for i in 0..n {
                regularized[(i, i)] += ridge;
            }
            let chol = Cholesky::new(regularized.clone())
                .expect("ridge-regularized Gram matrix is positive definite");
            (regularized, chol, true)
        }
    };
    let mut x = chol.solve(&b);
    let residual = &b - &system * &x;
    x += chol.solve(&residual);
    LeastSquares {
        x: x.as_slice().to_vec(),
        flagged,
        iterations: 1,
    }
}

fn solve_richardson(
    gram: &DMatrix<f64>,
    rhs: &[f64],
    omega: Option<f64>,
    max_iter: usize,
    tol: f64,
) -> LeastSquares {
    let n = gram.nrows();
    let b = DVector::from_column_slice(rhs);
    let b_max = b.amax();
    if b_max == 0.0 {
        return LeastSquares {
            x: vec![0.0; n],
            flagged: false,
            iterations: 0,
        };
    }
    let omega = omega.unwrap_or_else(|| {
        let lambda = largest_eigenvalue(gram);
        if lambda > 0.0 {
            1.0 / lambda
        } else {
            1.0
        }
    });
    let mut x = DVector::zeros(n);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let r = &b - gram * &x;
        if r.amax() <= tol * b_max {
            converged = true;
            break;
        }
        x.axpy(omega, &r, 1.0);
        iterations += 1;
    }
    if !converged {
        converged = (&b - gram * &x).amax() <= tol * b_max;
    }
    LeastSquares {
        x: x.as_slice().to_vec(),
        flagged: !converged,
        iterations,
    }
}

/// Power-iteration estimate of the largest eigenvalue of a symmetric PSD matrix.
pub(crate) fn largest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..POWER_STEPS {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        lambda = v.dot(&w);
        v = w / norm;
    }
    lambda.max(v.dot(&(m * &v)))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl From<DenseMatrix> for DMatrix<f64> {
    fn from(m: DenseMatrix) -> Self {
        m.inner
    }
}

impl TryFrom<DMatrix<f64>> for DenseMatrix {
    type Error = Error;

    fn try_from(inner: DMatrix<f64>) -> Result<Self> {
        if inner.nrows() == 0 || inner.ncols() == 0 {
            return invalid("matrix dimensions must be positive");
        }
        Ok(Self { inner })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn submatrix_of_identity() {
        let a = DenseMatrix::identity(2);
        let sub = submatrix_columns(&a, &IndexSet::new([1], 2).unwrap()).unwrap();
        assert_eq!(sub.rows(), 2);
        assert_eq!(sub.cols(), 1);
        assert_eq!(sub.column(0), &[0.0, 1.0]);
    }

    #[test]
    fn submatrix_full_set_is_identity_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(5, 7, &mut rng);
        let sub = submatrix_columns(&a, &IndexSet::full(7)).unwrap();
        assert_eq!(sub, a);
    }

    #[test]
    fn submatrix_picks_listed_columns() {
        let a = DenseMatrix::from_fn(3, 4, |i, j| (i + 4 * j) as f64);
        let sub = submatrix_columns(&a, &IndexSet::new([0, 2], 4).unwrap()).unwrap();
        assert_eq!(sub.column(0), &[0.0, 1.0, 2.0]);
        assert_eq!(sub.column(1), &[8.0, 9.0, 10.0]);
    }

    #[test]
    fn submatrix_rejects_out_of_range() {
        let a = DenseMatrix::identity(3);
        let idx = IndexSet::from_sorted(vec![0, 3]);
        assert!(matches!(
            submatrix_columns(&a, &idx),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn index_set_validation() {
        assert!(IndexSet::new([1, 1], 4).is_err());
        assert!(IndexSet::new([4], 4).is_err());
        let s = IndexSet::new([3, 0, 2], 5).unwrap();
        assert_eq!(s.as_slice(), &[0, 2, 3]);
        assert_eq!(s.complement(5).as_slice(), &[1, 4]);
        let u = s.union(&IndexSet::new([1, 2], 5).unwrap());
        assert_eq!(u.as_slice(), &[0, 1, 2, 3]);
    }

    #[test]
    fn identity_least_squares_returns_rhs() {
        let y = vec![1.5, -2.0, 0.25];
        let sol = least_squares(&DenseMatrix::identity(3), &y, SolveMethod::Direct).unwrap();
        for (a, b) in sol.x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(!sol.flagged);
    }

    #[test]
    fn orthonormal_columns_give_adjoint() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = DenseMatrix::new(3, 2, vec![s, s, 0.0, s, -s, 0.0]).unwrap();
        let y = vec![1.0, 2.0, 3.0];
        let sol = least_squares(&a, &y, SolveMethod::Direct).unwrap();
        let expect = a.adjoint_mul_vec(&y);
        for (a, b) in sol.x.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn consistent_system_recovers_solution() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = random_matrix(8, 3, &mut rng);
        let x0: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
        let y = a.mul_vec(&x0);
        let sol = least_squares(&a, &y, SolveMethod::Direct).unwrap();
        for (a, b) in sol.x.iter().zip(&x0) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn normal_equation_optimality() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_matrix(30, 12, &mut rng);
            let y: Vec<f64> = (0..30).map(|_| rng.sample(StandardNormal)).collect();
            let sol = least_squares(&a, &y, SolveMethod::Direct).unwrap();
            let r = sub(&y, &a.mul_vec(&sol.x));
            assert!(norm_inf(&a.adjoint_mul_vec(&r)) <= 1e-10 * norm_inf(&a.adjoint_mul_vec(&y)));
        }
    }

    #[test]
    fn richardson_matches_direct() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_matrix(40, 10, &mut rng);
        let y: Vec<f64> = (0..40).map(|_| rng.sample(StandardNormal)).collect();
        let direct = least_squares(&a, &y, SolveMethod::Direct).unwrap();
        let rich = least_squares(&a, &y, SolveMethod::richardson()).unwrap();
        assert!(!rich.flagged);
        let diff = norm_inf(&sub(&direct.x, &rich.x));
        assert!(diff < 1e-6, "diff {diff}");
    }

    #[test]
    fn rank_deficient_falls_back_to_ridge() {
        let a = DenseMatrix::new(3, 2, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        let dup = DenseMatrix::new(3, 2, vec![1.0, 1.0, 0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!(!least_squares(&a, &[1.0, 2.0, 0.0], SolveMethod::Direct).unwrap().flagged);
        let sol = least_squares(&dup, &[1.0, 1.0, 0.0], SolveMethod::Direct).unwrap();
        assert!(sol.flagged);
        assert!(sol.x.iter().all(|v| v.is_finite()));
        // min-norm split of a duplicated column
        assert!((sol.x[0] - 0.5).abs() < 1e-6 && (sol.x[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn least_squares_dimension_errors() {
        let a = DenseMatrix::identity(3);
        assert!(least_squares(&a, &[1.0, 2.0], SolveMethod::Direct).is_err());
        let wide = DenseMatrix::zeros(2, 3);
        assert!(least_squares(&wide, &[1.0, 2.0], SolveMethod::Direct).is_err());
    }

    #[test]
    fn correlation_of_orthonormal_is_identity() {
        let c = correlation_matrix(&DenseMatrix::identity(4));
        assert_eq!(c, DenseMatrix::identity(4));
    }

    #[test]
    fn correlation_of_duplicate_columns() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = DenseMatrix::new(2, 3, vec![s, s, 1.0, 0.0, s, s]).unwrap();
        let c = correlation_matrix(&phi);
        assert!((c.get(0, 2) - 1.0).abs() < 1e-15);
        assert!((c.get(2, 0) - 1.0).abs() < 1e-15);
    }
}
