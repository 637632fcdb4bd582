//! Capacity-optimal transmit covariance for a fixed channel.
//!
//! With `H = U S V^H` truncated to its numerical rank `S`, the optimal
//! covariance is `V diag(p) V^H` where `p_s = max(mu - sigma^2 / s_s^2, 0)` and
//! the water level `mu` makes `sum p_s = P_max`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Singular values below this fraction of the largest are treated as zero.
pub const RANK_TOL: f64 = 1e-10;
/// Largest singular value below which the channel counts as zero.
const ZERO_CHANNEL: f64 = 1e-12;
const BUDGET_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 500;

#[derive(Debug, Clone)]
pub struct WaterFillingResult {
    /// Optimal covariance `Q`, `N x N`.
    pub covariance: CMatrix,
    /// Power on each retained eigenmode, ordered like `singular_values`.
    pub powers: Vec<f64>,
    /// Retained singular values of `H`, descending.
    pub singular_values: Vec<f64>,
    /// The water level `mu = 1 / p_0`.
    pub water_level: f64,
    /// Numerical rank of `H`.
    pub rank: usize,
}

impl WaterFillingResult {
    pub fn total_power(&self) -> f64 {
        self.powers.iter().sum()
    }
}

/// Power allocation over modes with noise-to-gain levels `floors`, found by
/// bisection on the water level. Returns `(powers, water_level)`.
pub fn allocate_powers(floors: &[f64], p_max: f64) -> (Vec<f64>, f64) {
    let used = |mu: f64| floors.iter().map(|f| (mu - f).max(0.0)).sum::<f64>();
    let mut lo = floors.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = floors.iter().copied().fold(f64::NEG_INFINITY, f64::max) + p_max;
    let mut mu = 0.5 * (lo + hi);
    for _ in 0..MAX_BISECTIONS {
        mu = 0.5 * (lo + hi);
        let excess = used(mu) - p_max;
        if excess.abs() <= BUDGET_TOL {
            break;
        }
        if excess > 0.0 {
            hi = mu;
        } else {
            lo = mu;
        }
        if hi - lo <= f64::EPSILON * hi.abs() {
            break;
        }
    }
    let powers = floors.iter().map(|f| (mu - f).max(0.0)).collect();
    (powers, mu)
}

pub fn water_filling(h: &CMatrix, noise_power: f64, p_max: f64) -> Result<WaterFillingResult> {
    if !(p_max > 0.0) {
        return Err(Error::Precondition(format!(
            "power budget must be positive, got {p_max}"
        )));
    }
    if !(noise_power > 0.0) {
        return Err(Error::Precondition(format!(
            "noise power must be positive, got {noise_power}"
        )));
    }
    if h.iter().any(|e| !e.re.is_finite() || !e.im.is_finite()) {
        return Err(Error::NonFinite("channel matrix".into()));
    }
    let n = h.ncols();
    let svd = h.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let largest = order.first().map_or(0.0, |&i| svd.singular_values[i]);
    if largest <= ZERO_CHANNEL {
        return Err(Error::ZeroChannel);
    }
    let kept: Vec<usize> = order
        .into_iter()
        .filter(|&i| svd.singular_values[i] >= RANK_TOL * largest)
        .collect();
    let singular_values: Vec<f64> = kept.iter().map(|&i| svd.singular_values[i]).collect();
    let floors: Vec<f64> = singular_values.iter().map(|s| noise_power / (s * s)).collect();
    let (powers, water_level) = allocate_powers(&floors, p_max);

    // V has the conjugated rows of V^H as columns
    let v = CMatrix::from_fn(n, kept.len(), |row, s| v_t[(kept[s], row)].conj());
    let p = DVector::from_iterator(kept.len(), powers.iter().map(|&x| C64::new(x, 0.0)));
    let covariance = &v * CMatrix::from_diagonal(&p) * v.adjoint();

    Ok(WaterFillingResult {
        covariance,
        powers,
        singular_values,
        water_level,
        rank: kept.len(),
    })
}
