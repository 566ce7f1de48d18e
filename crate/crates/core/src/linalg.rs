//! Symmetric eigendecomposition for dense matrices.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::Vector;

/// Eigenvalues in nondecreasing order and the matching orthonormal
/// eigenvectors as columns. Only the lower triangle of `a` is read.
pub fn sym_eigen(a: &DMatrix<f64>) -> Result<(Vector, DMatrix<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: a.ncols() });
    }
    if n == 0 {
        return Ok((Vector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let m = faer::Mat::<f64>::from_fn(n, n, |i, j| a[(i, j)]);
    let evd = m
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::InvalidParameter(format!("eigendecomposition failed: {e:?}")))?;
    let (u, s) = (evd.U(), evd.S().column_vector());
    Ok((Vector::from_fn(n, |i, _| s[i]), DMatrix::from_fn(n, n, |i, j| u[(i, j)])))
}
