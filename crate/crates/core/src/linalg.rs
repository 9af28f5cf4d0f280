//! Small shared dense kernels: SPD Cholesky with one symmetrizing retry and
//! principal submatrix extraction.

use nalgebra::{Cholesky, DMatrix, Dyn};

use crate::error::{Error, Result};

/// Cholesky of a symmetric positive-definite matrix. A failed factorization
/// is retried once on (M + Mᵀ)/2 to repair floating-point asymmetry, then
/// reported as a numeric error.
pub(crate) fn cholesky_spd(m: &DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    if let Some(c) = m.clone().cholesky() {
        return Ok(c);
    }
    let sym = (m + m.transpose()) * 0.5;
    sym.cholesky()
        .ok_or_else(|| Error::numeric(format!("{what} is not positive definite")))
}

/// Copies the principal submatrix on `nodes` into a contiguous buffer.
pub(crate) fn principal_submatrix(m: &DMatrix<f64>, nodes: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(nodes.len(), nodes.len(), |r, c| m[(nodes[r], nodes[c])])
}

pub(crate) fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}
