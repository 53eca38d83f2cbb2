//! Dense linear algebra helpers shared by the estimators.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen, SVD};

/// Condition number above which a solve is refused.
pub const MAX_CONDITION: f64 = 1e12;

/// Replaces `m` by `(m + mᵀ) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub fn is_symmetric(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    let n = m.nrows();
    (0..n).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= rel_tol * scale))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted descending.
pub fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Spectral condition number of a symmetric matrix; infinite when it is not
/// positive definite.
pub fn spd_condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Smallest eigenvalue of a symmetric matrix, relative to its largest magnitude.
pub fn min_relative_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(m.clone());
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    eig.eigenvalues.min() / scale
}

/// Positive semidefinite within a tolerance relative to the largest eigenvalue.
pub fn is_psd(m: &DMatrix<f64>, rel_tol: f64) -> bool {
    min_relative_eigenvalue(m) >= -rel_tol
}

/// Cholesky factor of a symmetric matrix after checking its conditioning.
pub fn spd_factor(m: &DMatrix<f64>) -> Result<Cholesky<f64, Dyn>, f64> {
    let cond = spd_condition_number(m);
    if !(cond <= MAX_CONDITION) {
        return Err(cond);
    }
    Cholesky::new(m.clone()).ok_or(cond)
}

/// Pseudo-inverse, rank and orthonormal null-space basis of a wide matrix.
#[derive(Clone, Debug)]
pub struct RowSpace {
    pub pinv: DMatrix<f64>,
    pub null_basis: DMatrix<f64>,
    pub rank: usize,
}

impl RowSpace {
    /// Decomposes an `m × n` matrix with `m ≤ n`.
    ///
    /// The matrix is padded with zero rows to `n × n` so that the SVD yields
    /// the full right singular basis; right singular vectors with
    /// negligible singular values span the null space.
    pub fn new(h: &DMatrix<f64>) -> Self {
        let (m, n) = h.shape();
        assert!(m <= n, "RowSpace expects a wide matrix");
        if n == 0 {
            return RowSpace { pinv: DMatrix::zeros(0, m), null_basis: DMatrix::zeros(0, 0), rank: 0 };
        }
        let mut padded = DMatrix::zeros(n, n);
        padded.rows_mut(0, m).copy_from(h);
        let svd = SVD::new(padded, true, true);
        let u = svd.u.as_ref().expect("u requested");
        let v_t = svd.v_t.as_ref().expect("v_t requested");
        let sigma = &svd.singular_values;
        let tol = n as f64 * f64::EPSILON * sigma.max();

        let mut pinv = DMatrix::zeros(n, m);
        let mut null_cols = Vec::new();
        for k in 0..n {
            if sigma[k] > tol {
                let v = v_t.row(k).transpose();
                let u_top = u.column(k).rows(0, m).transpose();
                pinv += (v * u_top) / sigma[k];
            } else {
                null_cols.push(v_t.row(k).transpose());
            }
        }
        let rank = n - null_cols.len();
        let null_basis = if null_cols.is_empty() {
            DMatrix::zeros(n, 0)
        } else {
            DMatrix::from_columns(&null_cols)
        };
        RowSpace { pinv, null_basis, rank }
    }
}

/// Numerical rank from singular values.
pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.singular_values();
    let tol = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * sv.max();
    sv.iter().filter(|&&s| s > tol).count()
}

/// `‖a − b‖_F / ‖b‖_F` (absolute when `b` is zero).
pub fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let diff = (a - b).norm();
    let scale = b.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}
