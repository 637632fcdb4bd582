//! Projected gradient descent over antenna positions in a square region,
//! with Armijo backtracking along the projection arc.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::PlacementConstraints;
use crate::geometry::{AntennaLayout, Point2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PgConfig {
    pub initial_step: f64,
    pub armijo_c: f64,
    pub backtrack_factor: f64,
    pub max_iters: usize,
    pub grad_tol: f64,
}

impl Default for PgConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            armijo_c: 1e-4,
            backtrack_factor: 0.5,
            max_iters: 200,
            grad_tol: 1e-6,
        }
    }
}

impl PgConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.initial_step > 0.0
            && self.armijo_c > 0.0
            && self.armijo_c < 1.0
            && self.backtrack_factor > 0.0
            && self.backtrack_factor < 1.0
            && self.max_iters > 0
            && self.grad_tol > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "projected-gradient settings out of range (steps/tolerances > 0, armijo_c and backtrack_factor in (0, 1)): {self:?}"
            )))
        }
    }
}

/// An objective over layouts with a gradient of one `Point2` per antenna.
pub trait DifferentiableObjective {
    fn value(&mut self, layout: &AntennaLayout) -> Result<f64>;
    fn value_and_gradient(&mut self, layout: &AntennaLayout) -> Result<(f64, Vec<Point2>)>;
}

/// Adapts a closure returning `(value, gradient)`.
pub struct FnObjective<F>(pub F);

impl<F> DifferentiableObjective for FnObjective<F>
where
    F: FnMut(&AntennaLayout) -> Result<(f64, Vec<Point2>)>,
{
    fn value(&mut self, layout: &AntennaLayout) -> Result<f64> {
        Ok((self.0)(layout)?.0)
    }

    fn value_and_gradient(&mut self, layout: &AntennaLayout) -> Result<(f64, Vec<Point2>)> {
        (self.0)(layout)
    }
}

#[derive(Debug, Clone)]
pub struct PgOutcome {
    pub layout: AntennaLayout,
    pub objective: f64,
    pub iterations: usize,
    /// Objective at the start and after every accepted step.
    pub objective_trace: Vec<f64>,
    /// Whether the projected-gradient norm dropped below `grad_tol`.
    pub converged: bool,
}

/// Coordinatewise clamp onto `[0, A]^2`.
pub fn project_to_region(p: Point2, region: &PlacementConstraints) -> Point2 {
    let a = region.region_side;
    Point2::new(p.x.clamp(0.0, a), p.y.clamp(0.0, a))
}

fn step(x: &AntennaLayout, g: &[Point2], eta: f64, region: &PlacementConstraints) -> AntennaLayout {
    x.iter()
        .zip(g)
        .map(|(p, d)| project_to_region(*p - *d * eta, region))
        .collect()
}

fn check_finite(value: f64, grad: Option<&[Point2]>, at: &AntennaLayout) -> Result<()> {
    if !value.is_finite() || grad.is_some_and(|g| g.iter().any(|p| !p.is_finite())) {
        return Err(Error::NonFinite(format!(
            "objective callback returned a non-finite result at {:?}",
            at.to_flat()
        )));
    }
    Ok(())
}

pub fn projected_gradient<O: DifferentiableObjective + ?Sized>(
    objective: &mut O,
    r_init: &AntennaLayout,
    region: &PlacementConstraints,
    config: &PgConfig,
) -> Result<PgOutcome> {
    config.validate()?;
    if r_init.iter().any(|p| project_to_region(*p, region).dist(*p) > 1e-12) {
        return Err(Error::Precondition("initial layout lies outside the region".into()));
    }
    let mut x: AntennaLayout = r_init.iter().map(|p| project_to_region(*p, region)).collect();
    let (mut fx, mut gx) = objective.value_and_gradient(&x)?;
    check_finite(fx, Some(&gx), &x)?;
    if gx.len() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "gradient has {} entries for {} antennas",
            gx.len(),
            x.len()
        )));
    }

    let mut trace = vec![fx];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < config.max_iters {
        let unit = step(&x, &gx, 1.0, region);
        let pg_norm = x.sq_distance_to(&unit).sqrt();
        if pg_norm <= config.grad_tol {
            converged = true;
            break;
        }

        let mut eta = config.initial_step;
        let mut accepted = None;
        while eta > f64::EPSILON * config.initial_step {
            let trial = step(&x, &gx, eta, region);
            let slope: f64 = trial
                .iter()
                .zip(x.iter())
                .zip(&gx)
                .map(|((t, p), g)| (t.x - p.x) * g.x + (t.y - p.y) * g.y)
                .sum();
            let ft = objective.value(&trial)?;
            check_finite(ft, None, &trial)?;
            if ft <= fx + config.armijo_c * slope {
                accepted = Some(trial);
                break;
            }
            eta *= config.backtrack_factor;
        }
        let Some(next) = accepted else {
            log::debug!("projected gradient: line search stalled at iteration {iterations}");
            break;
        };
        let (fn_, gn) = objective.value_and_gradient(&next)?;
        check_finite(fn_, Some(&gn), &next)?;
        x = next;
        fx = fn_;
        gx = gn;
        trace.push(fx);
        iterations += 1;
    }

    Ok(PgOutcome {
        layout: x,
        objective: fx,
        iterations,
        objective_trace: trace,
        converged,
    })
}
