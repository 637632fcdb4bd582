//! The two case studies as [`ProblemInstance`]s.
//!
//! Gradients are analytic. For a row-local channel perturbation `dH` the
//! capacity objective `-log2 det(I + H Q H^H / s2)` changes by
//! `-(2 / (s2 ln 2)) Re tr(Q H^H A^{-1} dH)` with `A = I + H Q H^H / s2`, and
//! the RZF objective `||I - H F||^2 + alpha ||F||^2` by
//! `-2 Re tr(F E^H dH)` with `E = I - H F`.

use nalgebra::linalg::Cholesky;

use crate::channel::{
    assemble_mimo_channel, assemble_miso_channels, mimo_row_derivatives, miso_column_derivatives, MimoChannelModel,
    MisoUserModel,
};
use crate::error::{Error, Result};
use crate::framework::ProblemInstance;
use crate::geometry::{AntennaLayout, Point2};
use crate::solvers::{capacity, hermitian_part, log_det_hpd, rzf_objective, rzf_precoder, sum_rate, water_filling};
use crate::{CMatrix, C64};

/// Capacity maximization over positions and transmit covariance.
#[derive(Debug, Clone)]
pub struct CapacityProblem {
    pub model: MimoChannelModel,
    pub noise_power: f64,
    pub p_max: f64,
}

impl CapacityProblem {
    pub fn new(model: MimoChannelModel, noise_power: f64, p_max: f64) -> Result<Self> {
        if !(noise_power > 0.0 && p_max > 0.0) {
            return Err(Error::Precondition(format!(
                "noise power and power budget must be positive, got {noise_power} and {p_max}"
            )));
        }
        Ok(Self {
            model,
            noise_power,
            p_max,
        })
    }

    pub fn channel(&self, layout: &AntennaLayout) -> Result<CMatrix> {
        assemble_mimo_channel(layout, &self.model)
    }

    /// Capacity with the water-filling covariance, in bits/s/Hz.
    pub fn capacity_at(&self, layout: &AntennaLayout) -> Result<f64> {
        let h = self.channel(layout)?;
        let wf = water_filling(&h, self.noise_power, self.p_max)?;
        capacity(&h, &wf.covariance, self.noise_power)
    }

    fn a_matrix(&self, h: &CMatrix, q: &CMatrix) -> CMatrix {
        let m = h.nrows();
        CMatrix::identity(m, m) + h * q * h.adjoint() * C64::new(1.0 / self.noise_power, 0.0)
    }
}

impl ProblemInstance for CapacityProblem {
    type Block = CMatrix;

    fn solve_block(&self, layout: &AntennaLayout) -> Result<CMatrix> {
        let h = self.channel(layout)?;
        Ok(water_filling(&h, self.noise_power, self.p_max)?.covariance)
    }

    fn objective(&self, layout: &AntennaLayout, q: &CMatrix) -> Result<f64> {
        let h = self.channel(layout)?;
        Ok(-log_det_hpd(&self.a_matrix(&h, q))? / std::f64::consts::LN_2)
    }

    fn objective_gradient(&self, layout: &AntennaLayout, q: &CMatrix) -> Result<(f64, Vec<Point2>)> {
        let h = self.channel(layout)?;
        let (dx, dy) = mimo_row_derivatives(layout, &self.model)?;
        let a = hermitian_part(&self.a_matrix(&h, q));
        let chol = Cholesky::new(a).ok_or_else(|| Error::NonFinite("I + H Q H^H / s2 not positive definite".into()))?;
        let l = chol.l_dirty();
        let logdet: f64 = (0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum();
        let value = -logdet / std::f64::consts::LN_2;
        // W = Q H^H A^{-1} = (A^{-1} H Q)^H
        let w = chol.solve(&(&h * q)).adjoint();
        let scale = -2.0 / (self.noise_power * std::f64::consts::LN_2);
        let grad = (0..layout.len())
            .map(|m| {
                let mut gx = C64::new(0.0, 0.0);
                let mut gy = C64::new(0.0, 0.0);
                for n in 0..h.ncols() {
                    gx += w[(n, m)] * dx[(m, n)];
                    gy += w[(n, m)] * dy[(m, n)];
                }
                Point2::new(scale * gx.re, scale * gy.re)
            })
            .collect();
        Ok((value, grad))
    }
}

/// RZF precoding over positions and precoder.
#[derive(Debug, Clone)]
pub struct RzfProblem {
    pub users: Vec<MisoUserModel>,
    pub alpha: f64,
}

impl RzfProblem {
    pub fn new(users: Vec<MisoUserModel>, alpha: f64) -> Result<Self> {
        if users.is_empty() {
            return Err(Error::Precondition("at least one user required".into()));
        }
        if !(alpha >= 0.0) {
            return Err(Error::Precondition(format!("alpha must be non-negative, got {alpha}")));
        }
        Ok(Self { users, alpha })
    }

    pub fn channel(&self, layout: &AntennaLayout) -> Result<CMatrix> {
        assemble_miso_channels(layout, &self.users)
    }

    pub fn noise_powers(&self) -> Vec<f64> {
        self.users.iter().map(|u| u.noise_power()).collect()
    }

    /// Sum rate with the closed-form RZF precoder, in bits/s/Hz.
    pub fn sum_rate_at(&self, layout: &AntennaLayout) -> Result<f64> {
        let h = self.channel(layout)?;
        let f = rzf_precoder(&h, self.alpha)?;
        sum_rate(&h, &f, &self.noise_powers())
    }
}

impl ProblemInstance for RzfProblem {
    type Block = CMatrix;

    fn solve_block(&self, layout: &AntennaLayout) -> Result<CMatrix> {
        rzf_precoder(&self.channel(layout)?, self.alpha)
    }

    fn objective(&self, layout: &AntennaLayout, f: &CMatrix) -> Result<f64> {
        Ok(rzf_objective(&self.channel(layout)?, f, self.alpha))
    }

    fn objective_gradient(&self, layout: &AntennaLayout, f: &CMatrix) -> Result<(f64, Vec<Point2>)> {
        let h = self.channel(layout)?;
        let (dx, dy) = miso_column_derivatives(layout, &self.users)?;
        let k = h.nrows();
        let e = CMatrix::identity(k, k) - &h * f;
        let value = e.norm_squared() + self.alpha * f.norm_squared();
        let t = f * e.adjoint();
        let grad = (0..layout.len())
            .map(|m| {
                let mut gx = C64::new(0.0, 0.0);
                let mut gy = C64::new(0.0, 0.0);
                for kk in 0..k {
                    gx += t[(m, kk)] * dx[(kk, m)];
                    gy += t[(m, kk)] * dy[(kk, m)];
                }
                Point2::new(-2.0 * gx.re, -2.0 * gy.re)
            })
            .collect();
        Ok((value, grad))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::finite_difference_gradient;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn layout() -> AntennaLayout {
        AntennaLayout::new(vec![
            Point2::new(0.3, 0.2),
            Point2::new(1.4, 0.6),
            Point2::new(0.8, 1.9),
            Point2::new(2.2, 2.5),
        ])
    }

    fn max_rel_err(a: &[Point2], b: &[Point2]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| x.dist_sq(*y)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y.norm_sq()).sum::<f64>().sqrt();
        num / den.max(1e-12)
    }

    #[test]
    fn capacity_gradient_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let model = MimoChannelModel::random(&mut rng, 10, 4, false).unwrap();
        let prob = CapacityProblem::new(model, 1.0, 10.0).unwrap();
        let x = layout();
        let q = prob.solve_block(&x).unwrap();
        let (v, g) = prob.objective_gradient(&x, &q).unwrap();
        assert!((v - prob.objective(&x, &q).unwrap()).abs() < 1e-12);
        let fd = finite_difference_gradient(|l| prob.objective(l, &q), &x, 1e-6).unwrap();
        assert!(max_rel_err(&g, &fd) < 1e-5);
        assert!((-v - prob.capacity_at(&x).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn rzf_gradient_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let users = (0..4)
            .map(|_| MisoUserModel::random(&mut rng, 10, 1.0).unwrap())
            .collect();
        let prob = RzfProblem::new(users, 6.0).unwrap();
        let x = layout();
        let f = prob.solve_block(&x).unwrap();
        let (v, g) = prob.objective_gradient(&x, &f).unwrap();
        assert!((v - prob.objective(&x, &f).unwrap()).abs() < 1e-12);
        let fd = finite_difference_gradient(|l| prob.objective(l, &f), &x, 1e-6).unwrap();
        assert!(max_rel_err(&g, &fd) < 1e-5);
    }
}
