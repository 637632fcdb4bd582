//! Field-response channel models.
//!
//! A receive path with elevation `theta` and azimuth `phi` contributes the
//! phase `(2 pi / lambda) * (x sin(theta) cos(phi) + y cos(theta))` at
//! position `(x, y)`. The MIMO channel is `H = B^H Sigma G`, with `B` holding
//! one field-response vector per base-station antenna and `G` the device-side
//! field-response matrix of a half-wavelength ULA.
//!
//! The multi-user MISO channel is stored as a `K x M` matrix whose row `k` is
//! `h_k^H`, so `H F` is the effective channel seen by the users. Entry
//! `(k, m)` is the conjugate of `sum_q g_{k,q} exp(j (2 pi / lambda) rho_{k,q}(r_m))`.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::geometry::{AntennaLayout, Point2};
use crate::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathAngles {
    pub elevation: f64,
    pub azimuth: f64,
}

impl PathAngles {
    pub fn new(elevation: f64, azimuth: f64) -> Self {
        Self { elevation, azimuth }
    }

    /// Direction cosines `(sin(theta) cos(phi), cos(theta))` weighting `x`
    /// and `y` in the path phase.
    pub fn direction(&self) -> (f64, f64) {
        (self.elevation.sin() * self.azimuth.cos(), self.elevation.cos())
    }

    fn draw<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            elevation: rng.random_range(0.0..PI),
            azimuth: rng.random_range(0.0..PI),
        }
    }
}

/// Circularly-symmetric complex Gaussian with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}

fn phase(wavenumber: f64, dir: (f64, f64), r: Point2) -> f64 {
    wavenumber * (r.x * dir.0 + r.y * dir.1)
}

/// Point-to-point channel between `M` movable antennas and an `N`-antenna device.
#[derive(Debug, Clone, PartialEq)]
pub struct MimoChannelModel {
    wavelength: f64,
    transmit_paths: Vec<PathAngles>,
    receive_paths: Vec<PathAngles>,
    path_response: CMatrix,
    num_device_antennas: usize,
}

impl MimoChannelModel {
    pub fn new(
        wavelength: f64,
        transmit_paths: Vec<PathAngles>,
        receive_paths: Vec<PathAngles>,
        path_response: CMatrix,
        num_device_antennas: usize,
    ) -> Result<Self> {
        if !(wavelength > 0.0) {
            return Err(Error::Precondition(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if transmit_paths.is_empty() || receive_paths.is_empty() {
            return Err(Error::Precondition(
                "at least one transmit and one receive path required".into(),
            ));
        }
        if num_device_antennas == 0 {
            return Err(Error::Precondition("device needs at least one antenna".into()));
        }
        if path_response.shape() != (receive_paths.len(), transmit_paths.len()) {
            return Err(Error::DimensionMismatch(format!(
                "path response is {:?}, expected {}x{}",
                path_response.shape(),
                receive_paths.len(),
                transmit_paths.len()
            )));
        }
        Ok(Self {
            wavelength,
            transmit_paths,
            receive_paths,
            path_response,
            num_device_antennas,
        })
    }

    /// Random model with angles uniform on `[0, pi)` and path gains
    /// `CN(0, 1/L)`. With `full_response` false, `Sigma` is diagonal and
    /// `L_t = L_r = paths`; otherwise every entry is drawn with variance
    /// `1/paths^2` so that the total path power is still one.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        paths: usize,
        num_device_antennas: usize,
        full_response: bool,
    ) -> Result<Self> {
        if paths == 0 {
            return Err(Error::Precondition("path count must be positive".into()));
        }
        let transmit_paths: Vec<_> = (0..paths).map(|_| PathAngles::draw(rng)).collect();
        let receive_paths: Vec<_> = (0..paths).map(|_| PathAngles::draw(rng)).collect();
        let l = paths as f64;
        let sigma = if full_response {
            let mut s = CMatrix::zeros(paths, paths);
            for q in 0..paths {
                for p in 0..paths {
                    s[(q, p)] = complex_gaussian(rng, 1.0 / (l * l));
                }
            }
            s
        } else {
            let diag: Vec<C64> = (0..paths).map(|_| complex_gaussian(rng, 1.0 / l)).collect();
            CMatrix::from_diagonal(&DVector::from_vec(diag))
        };
        Self::new(1.0, transmit_paths, receive_paths, sigma, num_device_antennas)
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn transmit_paths(&self) -> &[PathAngles] {
        &self.transmit_paths
    }

    pub fn receive_paths(&self) -> &[PathAngles] {
        &self.receive_paths
    }

    pub fn path_response(&self) -> &CMatrix {
        &self.path_response
    }

    pub fn num_device_antennas(&self) -> usize {
        self.num_device_antennas
    }

    fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// `b(r)`: entry `q` is `exp(j (2 pi / lambda) rho_q(r))`.
pub fn receive_field_vector(r: Point2, model: &MimoChannelModel) -> DVector<C64> {
    let k = model.wavenumber();
    DVector::from_iterator(
        model.receive_paths.len(),
        model
            .receive_paths
            .iter()
            .map(|path| C64::from_polar(1.0, phase(k, path.direction(), r))),
    )
}

/// `G`, with element `(p, n)` equal to `exp(j pi sin(theta_p) cos(phi_p) n)`.
pub fn transmit_field_matrix(model: &MimoChannelModel) -> CMatrix {
    let n_ant = model.num_device_antennas;
    CMatrix::from_fn(model.transmit_paths.len(), n_ant, |p, n| {
        let (u, _) = model.transmit_paths[p].direction();
        C64::from_polar(1.0, PI * u * n as f64)
    })
}

/// `Sigma G`, the part of `H` that does not depend on the positions.
fn path_to_device(model: &MimoChannelModel) -> CMatrix {
    &model.path_response * transmit_field_matrix(model)
}

/// `H = [b(r_1), ..., b(r_M)]^H Sigma G`, an `M x N` matrix.
pub fn assemble_mimo_channel(layout: &AntennaLayout, model: &MimoChannelModel) -> Result<CMatrix> {
    if layout.is_empty() {
        return Err(Error::Precondition("layout must hold at least one antenna".into()));
    }
    let sg = path_to_device(model);
    let lr = model.receive_paths.len();
    let bh = CMatrix::from_fn(layout.len(), lr, |m, q| {
        let k = model.wavenumber();
        C64::from_polar(1.0, -phase(k, model.receive_paths[q].direction(), layout[m]))
    });
    Ok(bh * sg)
}

/// Derivatives of each row of `H` with respect to its own antenna position.
///
/// Row `m` of the returned `(dx, dy)` is `d H[m, :] / d x_m` and
/// `d H[m, :] / d y_m`. No other row of `H` depends on `r_m`.
pub fn mimo_row_derivatives(layout: &AntennaLayout, model: &MimoChannelModel) -> Result<(CMatrix, CMatrix)> {
    if layout.is_empty() {
        return Err(Error::Precondition("layout must hold at least one antenna".into()));
    }
    let sg = path_to_device(model);
    let k = model.wavenumber();
    let lr = model.receive_paths.len();
    let mut dbx = CMatrix::zeros(layout.len(), lr);
    let mut dby = CMatrix::zeros(layout.len(), lr);
    for (m, &r) in layout.iter().enumerate() {
        for (q, path) in model.receive_paths.iter().enumerate() {
            let dir = path.direction();
            // d/dx conj(exp(j k rho)) = -j k a conj(exp(j k rho))
            let conj_b = C64::from_polar(1.0, -phase(k, dir, r));
            let minus_j = C64::new(0.0, -k);
            dbx[(m, q)] = minus_j * dir.0 * conj_b;
            dby[(m, q)] = minus_j * dir.1 * conj_b;
        }
    }
    Ok((dbx * &sg, dby * &sg))
}

/// Full Jacobian: for every antenna `m` the pair `(dH/dx_m, dH/dy_m)` of
/// `M x N` matrices, zero outside row `m`.
pub fn channel_position_jacobian(layout: &AntennaLayout, model: &MimoChannelModel) -> Result<Vec<(CMatrix, CMatrix)>> {
    let (dx, dy) = mimo_row_derivatives(layout, model)?;
    let (rows, cols) = dx.shape();
    Ok((0..rows)
        .map(|m| {
            let mut jx = CMatrix::zeros(rows, cols);
            let mut jy = CMatrix::zeros(rows, cols);
            jx.row_mut(m).copy_from(&dx.row(m));
            jy.row_mut(m).copy_from(&dy.row(m));
            (jx, jy)
        })
        .collect())
}

/// Generative parameters of one single-antenna user.
#[derive(Debug, Clone, PartialEq)]
pub struct MisoUserModel {
    wavelength: f64,
    paths: Vec<PathAngles>,
    gains: Vec<C64>,
    noise_power: f64,
}

impl MisoUserModel {
    pub fn new(wavelength: f64, paths: Vec<PathAngles>, gains: Vec<C64>, noise_power: f64) -> Result<Self> {
        if !(wavelength > 0.0) {
            return Err(Error::Precondition(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        if paths.is_empty() {
            return Err(Error::Precondition("user needs at least one path".into()));
        }
        if paths.len() != gains.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} paths but {} gains",
                paths.len(),
                gains.len()
            )));
        }
        if !(noise_power > 0.0) {
            return Err(Error::Precondition(format!(
                "noise power must be positive, got {noise_power}"
            )));
        }
        Ok(Self {
            wavelength,
            paths,
            gains,
            noise_power,
        })
    }

    /// Angles uniform on `[0, pi)`, gains `CN(0, 1/L)`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, paths: usize, noise_power: f64) -> Result<Self> {
        if paths == 0 {
            return Err(Error::Precondition("path count must be positive".into()));
        }
        let angles: Vec<_> = (0..paths).map(|_| PathAngles::draw(rng)).collect();
        let gains = (0..paths).map(|_| complex_gaussian(rng, 1.0 / paths as f64)).collect();
        Self::new(1.0, angles, gains, noise_power)
    }

    pub fn paths(&self) -> &[PathAngles] {
        &self.paths
    }

    pub fn gains(&self) -> &[C64] {
        &self.gains
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// `h_k(r)` for one antenna, before the conjugation applied in `H`.
    fn response(&self, r: Point2) -> C64 {
        let k = 2.0 * PI / self.wavelength;
        self.paths
            .iter()
            .zip(&self.gains)
            .map(|(path, g)| g * C64::from_polar(1.0, phase(k, path.direction(), r)))
            .sum()
    }

    /// `(d h_k / dx, d h_k / dy)` at `r`, before conjugation.
    fn response_gradient(&self, r: Point2) -> (C64, C64) {
        let k = 2.0 * PI / self.wavelength;
        let mut dx = C64::new(0.0, 0.0);
        let mut dy = C64::new(0.0, 0.0);
        for (path, g) in self.paths.iter().zip(&self.gains) {
            let dir = path.direction();
            let t = g * C64::from_polar(1.0, phase(k, dir, r)) * C64::new(0.0, k);
            dx += t * dir.0;
            dy += t * dir.1;
        }
        (dx, dy)
    }
}

fn check_users(layout: &AntennaLayout, users: &[MisoUserModel]) -> Result<()> {
    if layout.is_empty() {
        return Err(Error::Precondition("layout must hold at least one antenna".into()));
    }
    if users.is_empty() {
        return Err(Error::Precondition("at least one user required".into()));
    }
    Ok(())
}

/// `K x M` matrix with row `k` equal to `h_k^H`.
pub fn assemble_miso_channels(layout: &AntennaLayout, users: &[MisoUserModel]) -> Result<CMatrix> {
    check_users(layout, users)?;
    Ok(CMatrix::from_fn(users.len(), layout.len(), |k, m| {
        users[k].response(layout[m]).conj()
    }))
}

/// Column derivatives of the MISO matrix: column `m` of `(dx, dy)` is
/// `d H[:, m] / d x_m` and `d H[:, m] / d y_m`.
pub fn miso_column_derivatives(layout: &AntennaLayout, users: &[MisoUserModel]) -> Result<(CMatrix, CMatrix)> {
    check_users(layout, users)?;
    let mut dx = CMatrix::zeros(users.len(), layout.len());
    let mut dy = CMatrix::zeros(users.len(), layout.len());
    for (k, user) in users.iter().enumerate() {
        for (m, &r) in layout.iter().enumerate() {
            let (gx, gy) = user.response_gradient(r);
            dx[(k, m)] = gx.conj();
            dy[(k, m)] = gy.conj();
        }
    }
    Ok((dx, dy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_path_model(rx: PathAngles, tx: PathAngles, n: usize) -> MimoChannelModel {
        MimoChannelModel::new(
            1.0,
            vec![tx],
            vec![rx],
            CMatrix::from_element(1, 1, C64::new(1.0, 0.0)),
            n,
        )
        .unwrap()
    }

    fn random_model(seed: u64, paths: usize, n: usize) -> MimoChannelModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MimoChannelModel::random(&mut rng, paths, n, false).unwrap()
    }

    fn layout(points: &[(f64, f64)]) -> AntennaLayout {
        points.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    #[test]
    fn field_vector_at_origin_is_all_ones() {
        let model = random_model(1, 10, 4);
        let b = receive_field_vector(Point2::new(0.0, 0.0), &model);
        for e in b.iter() {
            assert!((e - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn half_wavelength_shift_flips_sign() {
        let model = single_path_model(PathAngles::new(PI / 2.0, 0.0), PathAngles::new(0.0, 0.0), 1);
        let b = receive_field_vector(Point2::new(0.5, 0.0), &model);
        assert!((b[0] - C64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn field_vector_phases_add() {
        let model = random_model(2, 10, 4);
        let r1 = Point2::new(0.3, -1.2);
        let r2 = Point2::new(2.1, 0.7);
        let sum = receive_field_vector(r1 + r2, &model);
        let prod = receive_field_vector(r1, &model).component_mul(&receive_field_vector(r2, &model));
        assert!((&sum - &prod).camax() < 1e-12);
        for e in sum.iter() {
            assert!((e.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transmit_matrix_structure() {
        let mut model = random_model(3, 6, 5);
        let g = transmit_field_matrix(&model);
        assert_eq!(g.shape(), (6, 5));
        for p in 0..6 {
            assert!((g[(p, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
            let ratio = g[(p, 1)] / g[(p, 0)];
            for n in 1..5 {
                assert!((g[(p, n)] / g[(p, n - 1)] - ratio).norm() < 1e-12);
            }
        }
        model.transmit_paths[2].elevation = 0.0;
        let g = transmit_field_matrix(&model);
        for n in 0..5 {
            assert!((g[(2, n)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn scalar_channel_has_unit_modulus() {
        let model = single_path_model(PathAngles::new(0.7, 1.1), PathAngles::new(0.4, 2.0), 1);
        let h = assemble_mimo_channel(&layout(&[(0.37, 1.91)]), &model).unwrap();
        assert!((h[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn permuting_layout_permutes_rows() {
        let model = random_model(4, 10, 4);
        let a = layout(&[(0.0, 0.0), (1.0, 0.2), (0.4, 1.5), (2.0, 2.0)]);
        let b = layout(&[(2.0, 2.0), (0.0, 0.0), (0.4, 1.5), (1.0, 0.2)]);
        let ha = assemble_mimo_channel(&a, &model).unwrap();
        let hb = assemble_mimo_channel(&b, &model).unwrap();
        for (row_b, row_a) in [(0, 3), (1, 0), (2, 2), (3, 1)] {
            assert!((hb.row(row_b) - ha.row(row_a)).camax() < 1e-14);
        }
    }

    #[test]
    fn model_validation() {
        let bad = MimoChannelModel::new(
            1.0,
            vec![PathAngles::new(0.0, 0.0)],
            vec![PathAngles::new(0.0, 0.0); 2],
            CMatrix::zeros(1, 1),
            2,
        );
        assert!(matches!(bad, Err(Error::DimensionMismatch(_))));
        let user = MisoUserModel::new(1.0, vec![PathAngles::new(0.0, 0.0)], vec![], 1.0);
        assert!(matches!(user, Err(Error::DimensionMismatch(_))));
        let user = MisoUserModel::new(1.0, vec![PathAngles::new(0.0, 0.0)], vec![C64::new(1.0, 0.0)], 0.0);
        assert!(user.is_err());
    }

    #[test]
    fn miso_single_path_at_origin_is_ones() {
        let user = MisoUserModel::new(1.0, vec![PathAngles::new(0.3, 0.9)], vec![C64::new(1.0, 0.0)], 1.0).unwrap();
        let h = assemble_miso_channels(&layout(&[(0.0, 0.0); 3]), &[user]).unwrap();
        for e in h.iter() {
            assert!((e - C64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn miso_rows_are_linear_in_gains() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let users: Vec<_> = (0..3)
            .map(|_| MisoUserModel::random(&mut rng, 5, 1.0).unwrap())
            .collect();
        let pos = layout(&[(0.1, 0.2), (1.3, 0.4)]);
        let h = assemble_miso_channels(&pos, &users).unwrap();
        let c = C64::new(0.5, -2.0);
        let mut scaled = users.clone();
        scaled[1].gains.iter_mut().for_each(|g| *g *= c);
        let hs = assemble_miso_channels(&pos, &scaled).unwrap();
        // row k holds conj(h_k), so it scales by conj(c)
        assert!((hs.row(1) - h.row(1) * c.conj()).camax() < 1e-14);
        assert!((hs.row(0) - h.row(0)).camax() == 0.0);
    }

    #[test]
    fn jacobian_vanishes_for_broadside_path() {
        let model = single_path_model(PathAngles::new(0.0, 0.3), PathAngles::new(0.5, 0.5), 3);
        let pos = layout(&[(0.2, 0.1), (1.0, 1.0)]);
        for (jx, jy) in channel_position_jacobian(&pos, &model).unwrap() {
            assert_eq!(jx.camax(), 0.0);
            assert!(jy.camax() > 0.0);
        }
    }

    #[test]
    fn jacobian_only_touches_own_row() {
        let model = random_model(5, 10, 4);
        let pos = layout(&[(0.2, 0.1), (1.0, 1.0), (2.0, 0.3)]);
        let jac = channel_position_jacobian(&pos, &model).unwrap();
        for (m, (jx, jy)) in jac.iter().enumerate() {
            for l in 0..3 {
                if l != m {
                    assert_eq!(jx.row(l).camax(), 0.0);
                    assert_eq!(jy.row(l).camax(), 0.0);
                }
            }
        }
    }

    #[test]
    fn same_seed_same_model() {
        assert_eq!(random_model(11, 10, 4), random_model(11, 10, 4));
        assert_ne!(random_model(11, 10, 4), random_model(12, 10, 4));
    }
}
