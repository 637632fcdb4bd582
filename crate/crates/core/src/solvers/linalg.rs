use nalgebra::linalg::Cholesky;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

pub(crate) fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Natural log-determinant of a Hermitian positive-definite matrix.
pub(crate) fn log_det_hpd(a: &CMatrix) -> Result<f64> {
    let chol =
        Cholesky::new(hermitian_part(a)).ok_or_else(|| Error::NonFinite("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    Ok((0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}
