//! Thin wrappers over dense symmetric linear algebra.
//!
//! Everything the crate needs reduces to three primitives: a sorted
//! symmetric eigendecomposition, eigenvalues-only extraction, and Cholesky
//! solves of symmetric positive-definite systems. The eigendecomposition
//! wrappers bump a process-wide counter so tests can assert how many
//! factorizations an algorithm really performs (e.g. grid selectors must
//! decompose the pooled covariance exactly once).

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

static EIGEN_COUNT: AtomicU64 = AtomicU64::new(0);

/// Number of symmetric eigendecompositions (full or values-only) performed
/// by this process so far. Monotone; intended for test instrumentation.
pub fn eigen_decomposition_count() -> u64 {
    EIGEN_COUNT.load(Ordering::Relaxed)
}

/// Symmetric eigendecomposition with eigenvalues sorted in descending order
/// and eigenvectors as matching orthonormal columns.
pub fn sym_eigen_desc(mat: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    EIGEN_COUNT.fetch_add(1, Ordering::Relaxed);
    let n = mat.nrows();
    let decomp = mat.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        decomp.eigenvalues[b]
            .partial_cmp(&decomp.eigenvalues[a])
            .expect("eigenvalue comparison")
    });
    let values = DVector::from_iterator(n, order.iter().map(|&i| decomp.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &decomp.eigenvectors.column(src));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "symmetric eigendecomposition did not converge".into(),
        ));
    }
    Ok((values, vectors))
}

/// Eigenvalues of a symmetric matrix, descending. Cheaper than
/// [`sym_eigen_desc`] when eigenvectors are not needed.
pub fn sym_eigenvalues_desc(mat: &DMatrix<f64>) -> Result<DVector<f64>> {
    EIGEN_COUNT.fetch_add(1, Ordering::Relaxed);
    let mut values: Vec<f64> = mat.clone().symmetric_eigenvalues().iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical(
            "symmetric eigenvalue extraction did not converge".into(),
        ));
    }
    values.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalue comparison"));
    Ok(DVector::from_vec(values))
}

/// Solves A·x = b for symmetric positive-definite A via Cholesky.
///
/// `context` names the system in the error message (e.g. "pooled covariance").
pub fn solve_spd(a: &DMatrix<f64>, b: &DVector<f64>, context: &str) -> Result<DVector<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical(format!("{context}: matrix is not positive definite")))?;
    Ok(chol.solve(b))
}

/// Lower Cholesky factor L with L·Lᵀ = A, for sampling and whitening.
pub fn cholesky_lower(a: &DMatrix<f64>, context: &str) -> Result<DMatrix<f64>> {
    let chol = a
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical(format!("{context}: matrix is not positive definite")))?;
    Ok(chol.l())
}

/// Relative symmetry defect max|A−Aᵀ| / max|A|; 0 for the zero matrix.
pub fn symmetry_defect(a: &DMatrix<f64>) -> f64 {
    let mut max_abs = 0.0f64;
    let mut max_diff = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            max_abs = max_abs.max(a[(i, j)].abs());
            max_diff = max_diff.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if max_abs == 0.0 {
        0.0
    } else {
        max_diff / max_abs
    }
}
