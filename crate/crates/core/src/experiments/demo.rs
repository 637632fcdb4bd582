//! Small projection demo for the CLI: random single-point projections
//! compared against a brute-force grid search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::{project_outside_disks, DiskSet, Point2};

#[derive(Debug, Clone)]
pub struct DemoCase {
    pub query: Point2,
    pub disks: DiskSet,
    pub projected: Point2,
    pub objective: f64,
    pub grid_objective: f64,
}

/// Smallest `||p - r||^2` over grid points `p` (spacing `h`, within `reach`
/// of `r`) that clear every disk.
pub fn grid_search(r: Point2, disks: &DiskSet, h: f64, reach: f64) -> f64 {
    let steps = (reach / h).ceil() as i64;
    let (i0, j0) = ((r.x / h).round() as i64, (r.y / h).round() as i64);
    let d2 = disks.radius() * disks.radius();
    let mut best = f64::INFINITY;
    for i in (i0 - steps)..=(i0 + steps) {
        let x = i as f64 * h;
        for j in (j0 - steps)..=(j0 + steps) {
            let p = Point2::new(x, j as f64 * h);
            let obj = p.dist_sq(r);
            if obj < best && disks.centers().iter().all(|c| p.dist_sq(*c) >= d2) {
                best = obj;
            }
        }
    }
    best
}

pub fn run_demo(cases: usize, seed: u64, h: f64) -> Result<Vec<DemoCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(cases);
    while out.len() < cases {
        let d: f64 = rng.random_range(0.3..=1.0);
        let n = rng.random_range(1..=4);
        let mut centers: Vec<Point2> = Vec::new();
        while centers.len() < n {
            let c = Point2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            if centers.iter().all(|o| o.dist(c) >= d) {
                centers.push(c);
            }
        }
        let query = Point2::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        let disks = DiskSet::new(centers, d)?;
        let projected = project_outside_disks(query, &disks)?;
        let objective = projected.dist_sq(query);
        let grid_objective = grid_search(query, &disks, h, objective.sqrt() + 4.0 * h);
        out.push(DemoCase {
            query,
            disks,
            projected,
            objective,
            grid_objective,
        });
    }
    Ok(out)
}
