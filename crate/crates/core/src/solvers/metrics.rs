use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::solvers::{hermitian_part, log_det_hpd};
use crate::{CMatrix, C64};

const PSD_TOL: f64 = 1e-10;

/// `log2 det(I + H Q H^H / sigma^2)` in bits/s/Hz.
pub fn capacity(h: &CMatrix, q: &CMatrix, noise_power: f64) -> Result<f64> {
    if q.nrows() != q.ncols() || q.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "H is {:?} but Q is {:?}",
            h.shape(),
            q.shape()
        )));
    }
    if !(noise_power > 0.0) {
        return Err(Error::Precondition(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    let scale = q.iter().map(|e| e.norm()).fold(1.0, f64::max);
    if (q - q.adjoint()).iter().any(|e| e.norm() > PSD_TOL * scale) {
        return Err(Error::Precondition("Q is not Hermitian".into()));
    }
    let min_eig = SymmetricEigen::new(hermitian_part(q))
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_eig < -PSD_TOL * scale {
        return Err(Error::Precondition(format!("Q is not PSD (eigenvalue {min_eig})")));
    }
    let m = h.nrows();
    let a = CMatrix::identity(m, m) + h * q * h.adjoint() * C64::new(1.0 / noise_power, 0.0);
    Ok(log_det_hpd(&a)? / std::f64::consts::LN_2)
}

/// `sum_k log2(1 + SINR_k)` with `SINR_k = |(HF)_kk|^2 / (sum_{j != k} |(HF)_kj|^2 + sigma_k^2)`.
pub fn sum_rate(h: &CMatrix, f: &CMatrix, noise_powers: &[f64]) -> Result<f64> {
    if h.ncols() != f.nrows() || f.ncols() != h.nrows() || noise_powers.len() != h.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "H is {:?}, F is {:?}, {} noise powers",
            h.shape(),
            f.shape(),
            noise_powers.len()
        )));
    }
    if let Some(s) = noise_powers.iter().find(|s| !(**s > 0.0)) {
        return Err(Error::Precondition(format!("noise power must be positive, got {s}")));
    }
    let hf = h * f;
    Ok((0..hf.nrows())
        .map(|k| {
            let signal = hf[(k, k)].norm_sqr();
            let interference: f64 = (0..hf.ncols()).filter(|&j| j != k).map(|j| hf[(k, j)].norm_sqr()).sum();
            (1.0 + signal / (interference + noise_powers[k])).log2()
        })
        .sum())
}
