//! Regularized zero-forcing precoding.

use nalgebra::linalg::Cholesky;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Pivot ratio below which `H^H H` counts as singular when `alpha = 0`.
const SINGULAR_PIVOT: f64 = 1e-12;

/// An RZF objective evaluation point.
#[derive(Debug, Clone)]
pub struct RzfInstance {
    pub alpha: f64,
    /// `K x M` channel, row `k` is `h_k^H`.
    pub channel: CMatrix,
    /// `M x K` precoder.
    pub precoder: CMatrix,
}

impl RzfInstance {
    pub fn new(alpha: f64, channel: CMatrix, precoder: CMatrix) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::Precondition(format!("alpha must be non-negative, got {alpha}")));
        }
        if channel.ncols() != precoder.nrows() || channel.nrows() != precoder.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "channel {:?} and precoder {:?}",
                channel.shape(),
                precoder.shape()
            )));
        }
        Ok(Self {
            alpha,
            channel,
            precoder,
        })
    }

    pub fn objective(&self) -> f64 {
        rzf_objective(&self.channel, &self.precoder, self.alpha)
    }
}

/// `F = (H^H H + alpha I)^{-1} H^H`, by a Cholesky solve.
pub fn rzf_precoder(h: &CMatrix, alpha: f64) -> Result<CMatrix> {
    if !(alpha >= 0.0) {
        return Err(Error::Precondition(format!("alpha must be non-negative, got {alpha}")));
    }
    let m = h.ncols();
    let hh = h.adjoint();
    let gram = &hh * h + CMatrix::identity(m, m) * C64::new(alpha, 0.0);
    let chol = match Cholesky::new(gram) {
        Some(chol) => chol,
        None if alpha == 0.0 => return Err(Error::RegularizationRequired),
        None => return Err(Error::NonFinite("RZF system is not positive definite".into())),
    };
    if alpha == 0.0 {
        let l = chol.l_dirty();
        let pivots: Vec<f64> = (0..m).map(|i| l[(i, i)].re).collect();
        let max = pivots.iter().copied().fold(0.0, f64::max);
        let min = pivots.iter().copied().fold(f64::INFINITY, f64::min);
        if !(min > SINGULAR_PIVOT * max) {
            return Err(Error::RegularizationRequired);
        }
    }
    Ok(chol.solve(&hh))
}

/// `||I - H F||_F^2 + alpha ||F||_F^2`.
pub fn rzf_objective(h: &CMatrix, f: &CMatrix, alpha: f64) -> f64 {
    let k = h.nrows();
    let residual = CMatrix::identity(k, k) - h * f;
    residual.norm_squared() + alpha * f.norm_squared()
}
