//! Penalty alternating optimization.
//!
//! The positions are duplicated into `r` (decision variable, constrained only
//! to the square region) and `z` (auxiliary copy carrying the spacing
//! constraint). Each outer iteration minimizes
//!
//! ```text
//! f(r, X) + rho * sum_m ||r_m - z_m||^2
//! ```
//!
//! over `X` (case-specific solver), then `r` (projected gradient), then `z`
//! (exact Gauss-Seidel projections), and finally grows `rho`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{self, AntennaLayout, Point2};
use crate::solvers::{project_to_region, projected_gradient, DifferentiableObjective, PgConfig};

/// Slack on the spacing constraint for reported layouts.
pub const REPORT_FEAS_TOL: f64 = 1e-6;
const INIT_ATTEMPTS: usize = 1000;
const REPAIR_ROUNDS: usize = 200;

/// Square region `[0, A]^2` and minimum pairwise spacing `D`, in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlacementConstraints {
    pub region_side: f64,
    pub min_distance: f64,
}

impl PlacementConstraints {
    pub fn new(region_side: f64, min_distance: f64) -> Result<Self> {
        if !(region_side > 0.0 && region_side.is_finite()) {
            return Err(Error::Precondition(format!(
                "region side must be positive, got {region_side}"
            )));
        }
        if !(min_distance > 0.0 && min_distance.is_finite()) {
            return Err(Error::Precondition(format!(
                "minimum distance must be positive, got {min_distance}"
            )));
        }
        Ok(Self {
            region_side,
            min_distance,
        })
    }

    /// Points per side of the densest `D`-spaced square lattice in the region.
    fn lattice_side(&self) -> usize {
        (self.region_side / self.min_distance + 1e-9).floor() as usize + 1
    }

    /// Fails unless a `D`-spaced square lattice in the region holds `m` points.
    pub fn check_room(&self, m: usize) -> Result<()> {
        let side = self.lattice_side();
        if side.saturating_mul(side) < m {
            return Err(Error::InfeasibleInstance(format!(
                "{m} antennas do not fit in a {}x{} region at spacing {}",
                self.region_side, self.region_side, self.min_distance
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: Point2, slack: f64) -> bool {
        let a = self.region_side;
        p.x >= -slack && p.y >= -slack && p.x <= a + slack && p.y <= a + slack
    }

    pub fn is_feasible(&self, layout: &AntennaLayout, slack: f64) -> bool {
        layout.iter().all(|p| self.contains(*p, slack)) && layout.is_pairwise_feasible(self.min_distance, slack)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthMode {
    /// Multiply `rho` after every outer iteration.
    PerIteration,
    /// Multiply `rho` only once the objective stalls at the current `rho`.
    PerStall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PenaltySchedule {
    pub rho0: f64,
    pub growth: f64,
    pub rho_max: f64,
    pub mode: GrowthMode,
}

impl Default for PenaltySchedule {
    fn default() -> Self {
        Self {
            rho0: 5.0,
            growth: 1.2,
            rho_max: 1e6,
            mode: GrowthMode::PerIteration,
        }
    }
}

impl PenaltySchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho0 > 0.0 && self.growth > 1.0 && self.rho_max >= self.rho0) {
            return Err(Error::Config(format!(
                "penalty schedule needs rho0 > 0, growth > 1, rho_max >= rho0: {self:?}"
            )));
        }
        Ok(())
    }

    fn next(&self, rho: f64) -> f64 {
        (rho * self.growth).min(self.rho_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    Analytic,
    FiniteDifference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FrameworkConfig {
    pub schedule: PenaltySchedule,
    /// Relative change of the penalized objective that counts as converged.
    pub rel_tol: f64,
    /// Largest `sum_m ||r_m - z_m||^2` accepted at termination.
    pub residual_tol: f64,
    pub max_outer: usize,
    pub z_tol: f64,
    pub z_max_sweeps: usize,
    pub pg: PgConfig,
    pub gradient: GradientMode,
    pub fd_step: f64,
}

impl Default for FrameworkConfig {
    fn default() -> Self {
        Self {
            schedule: PenaltySchedule::default(),
            rel_tol: 1e-3,
            residual_tol: 1e-6,
            max_outer: 500,
            z_tol: 1e-6,
            z_max_sweeps: 100,
            pg: PgConfig::default(),
            gradient: GradientMode::Analytic,
            fd_step: 1e-6,
        }
    }
}

impl FrameworkConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.pg.validate()?;
        let ok = self.rel_tol > 0.0
            && self.residual_tol > 0.0
            && self.max_outer > 0
            && self.z_tol > 0.0
            && self.z_max_sweeps > 0
            && self.fd_step > 0.0;
        if !ok {
            return Err(Error::Config(
                "framework tolerances, iteration caps and fd_step must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A case study plugged into the engine. `Block` is the non-position
/// variable `X` (a covariance, a precoder, ...).
pub trait ProblemInstance {
    type Block: Clone;

    /// Optimal `X` for fixed positions.
    fn solve_block(&self, layout: &AntennaLayout) -> Result<Self::Block>;

    /// `f(r, X)`, to be minimized.
    fn objective(&self, layout: &AntennaLayout, block: &Self::Block) -> Result<f64>;

    /// `f(r, X)` and its gradient with respect to every antenna position.
    fn objective_gradient(&self, layout: &AntennaLayout, block: &Self::Block) -> Result<(f64, Vec<Point2>)>;
}

/// `f(r, X) + rho * sum ||r_m - z_m||^2`.
pub fn penalized_objective<P: ProblemInstance + ?Sized>(
    instance: &P,
    layout: &AntennaLayout,
    block: &P::Block,
    z: &AntennaLayout,
    rho: f64,
) -> Result<f64> {
    Ok(instance.objective(layout, block)? + rho * layout.sq_distance_to(z))
}

/// Value and analytic gradient of the penalized objective.
pub fn penalized_gradient<P: ProblemInstance + ?Sized>(
    instance: &P,
    layout: &AntennaLayout,
    block: &P::Block,
    z: &AntennaLayout,
    rho: f64,
) -> Result<(f64, Vec<Point2>)> {
    let (f, mut grad) = instance.objective_gradient(layout, block)?;
    for ((g, r), zm) in grad.iter_mut().zip(layout.iter()).zip(z.iter()) {
        *g = *g + (*r - *zm) * (2.0 * rho);
    }
    Ok((f + rho * layout.sq_distance_to(z), grad))
}

/// Central differences of `value` with the given step, one pair per antenna.
pub fn finite_difference_gradient<F>(mut value: F, layout: &AntennaLayout, step: f64) -> Result<Vec<Point2>>
where
    F: FnMut(&AntennaLayout) -> Result<f64>,
{
    let mut flat = layout.to_flat();
    let mut grad = vec![0.0; flat.len()];
    for i in 0..flat.len() {
        let x0 = flat[i];
        flat[i] = x0 + step;
        let up = value(&AntennaLayout::from_flat(&flat))?;
        flat[i] = x0 - step;
        let down = value(&AntennaLayout::from_flat(&flat))?;
        flat[i] = x0;
        grad[i] = (up - down) / (2.0 * step);
    }
    Ok(grad.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect())
}

/// The `r`-block objective handed to projected gradient.
struct PenalizedObjective<'a, P: ProblemInstance + ?Sized> {
    instance: &'a P,
    block: &'a P::Block,
    z: &'a AntennaLayout,
    rho: f64,
    gradient: GradientMode,
    fd_step: f64,
}

impl<P: ProblemInstance + ?Sized> DifferentiableObjective for PenalizedObjective<'_, P> {
    fn value(&mut self, layout: &AntennaLayout) -> Result<f64> {
        penalized_objective(self.instance, layout, self.block, self.z, self.rho)
    }

    fn value_and_gradient(&mut self, layout: &AntennaLayout) -> Result<(f64, Vec<Point2>)> {
        match self.gradient {
            GradientMode::Analytic => penalized_gradient(self.instance, layout, self.block, self.z, self.rho),
            GradientMode::FiniteDifference => {
                let value = self.value(layout)?;
                let step = self.fd_step;
                let grad = finite_difference_gradient(|x| self.value(x), layout, step)?;
                Ok((value, grad))
            }
        }
    }
}

/// One outer iteration of the engine.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub rho: f64,
    /// Unpenalized `f(r, X)` after the iteration.
    pub objective: f64,
    /// Penalized objective after the `z` update.
    pub penalized: f64,
    /// `sum_m ||r_m - z_m||^2` after the `z` update.
    pub residual: f64,
    /// Penalized objective at fixed `rho`: before the `X` update (absent on
    /// the first iteration), after `X`, after `r`, after `z`.
    pub block_values: [Option<f64>; 4],
    pub pg_iterations: usize,
    pub z_sweeps: usize,
}

/// Mutable state of a run.
#[derive(Debug, Clone)]
pub struct PenaltyState<B> {
    pub r: AntennaLayout,
    pub z: AntennaLayout,
    pub block: Option<B>,
    pub rho: f64,
    pub objective_trace: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverReport {
    pub final_layout: AntennaLayout,
    /// `f` at `final_layout` with its optimal block.
    pub final_objective: f64,
    pub residual: f64,
    pub outer_iterations: usize,
    pub trace: Vec<IterationRecord>,
    /// True when `max_outer` was reached before the stopping test passed.
    pub hit_iteration_cap: bool,
    /// True when the reported layout could not be brought inside the region
    /// without breaking the spacing constraint.
    pub region_violation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinalizedLayout {
    pub layout: AntennaLayout,
    /// Whether the decision copy `r` was reported (as opposed to `z`).
    pub from_r: bool,
    pub region_violation: bool,
}

/// Pick the layout to report: `r` if it is feasible on its own, otherwise
/// `z` clamped to the region (repaired by alternating projections when the
/// clamp breaks the spacing), otherwise `z` as is with a violation flag.
pub fn finalize_layout(r: &AntennaLayout, z: &AntennaLayout, constraints: &PlacementConstraints) -> FinalizedLayout {
    if constraints.is_feasible(r, REPORT_FEAS_TOL) {
        return FinalizedLayout {
            layout: r.clone(),
            from_r: true,
            region_violation: false,
        };
    }
    // Alternate the region clamp with the exact spacing projection. A single
    // clamp usually suffices; the loop repairs points pushed slightly outside
    // the region next to a neighbor.
    let clamp = |l: &AntennaLayout| -> AntennaLayout { l.iter().map(|p| project_to_region(*p, constraints)).collect() };
    let mut spaced = z.clone();
    for _ in 0..REPAIR_ROUNDS {
        let clamped = clamp(&spaced);
        if clamped.is_pairwise_feasible(constraints.min_distance, REPORT_FEAS_TOL) {
            return FinalizedLayout {
                layout: clamped,
                from_r: false,
                region_violation: false,
            };
        }
        match geometry::solve_z_subproblem(&clamped, &spaced, constraints.min_distance, 1e-12, 100) {
            Ok(next) => spaced = next.z,
            Err(_) => break,
        }
        if constraints.is_feasible(&spaced, REPORT_FEAS_TOL) {
            return FinalizedLayout {
                layout: spaced,
                from_r: false,
                region_violation: false,
            };
        }
    }
    FinalizedLayout {
        layout: z.clone(),
        from_r: false,
        region_violation: true,
    }
}

/// Seeded feasible starting layout.
///
/// Antennas start on a `g x g` grid (`g = ceil(sqrt(M))`) at the cell centers
/// of the region when those are at least `D` apart, or on the densest
/// `D`-spaced lattice otherwise, and are then jittered by at most half the
/// spacing surplus.
pub fn initialize_layout(m: usize, constraints: &PlacementConstraints, seed: u64) -> Result<AntennaLayout> {
    if m == 0 {
        return Err(Error::Precondition("need at least one antenna".into()));
    }
    constraints.check_room(m)?;
    let a = constraints.region_side;
    let d = constraints.min_distance;
    let g = (m as f64).sqrt().ceil() as usize;
    let cell = a / g as f64;
    let (cols, spacing, offset) = if cell >= d {
        (g, cell, cell / 2.0)
    } else {
        let side = constraints.lattice_side();
        let spacing = if side > 1 { a / (side - 1) as f64 } else { a };
        (side, spacing, 0.0)
    };
    let base: Vec<Point2> = (0..m)
        .map(|i| {
            Point2::new(
                offset + (i % cols) as f64 * spacing,
                offset + (i / cols) as f64 * spacing,
            )
        })
        .collect();
    let jitter = if m > 1 { (spacing - d).max(0.0) / 2.0 } else { a / 2.0 };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..INIT_ATTEMPTS {
        let trial: AntennaLayout = base
            .iter()
            .map(|p| {
                let dx = if jitter > 0.0 {
                    rng.random_range(-jitter..=jitter)
                } else {
                    0.0
                };
                let dy = if jitter > 0.0 {
                    rng.random_range(-jitter..=jitter)
                } else {
                    0.0
                };
                project_to_region(*p + Point2::new(dx, dy), constraints)
            })
            .collect();
        if constraints.is_feasible(&trial, 0.0) {
            return Ok(trial);
        }
    }
    let fallback = AntennaLayout::new(base);
    if constraints.is_feasible(&fallback, 1e-12) {
        Ok(fallback)
    } else {
        Err(Error::InfeasibleInstance(format!(
            "no feasible layout for {m} antennas found after {INIT_ATTEMPTS} attempts"
        )))
    }
}

/// Run the penalty alternating optimization from `init`.
pub fn run_penalty_ao<P: ProblemInstance + ?Sized>(
    instance: &P,
    constraints: &PlacementConstraints,
    init: &AntennaLayout,
    config: &FrameworkConfig,
) -> Result<SolverReport> {
    config.validate()?;
    if init.is_empty() {
        return Err(Error::Precondition("initial layout is empty".into()));
    }
    constraints.check_room(init.len())?;
    if !constraints.is_feasible(init, geometry::EPS_FEAS) {
        return Err(Error::Precondition(
            "initial layout must lie in the region and satisfy the spacing constraint".into(),
        ));
    }

    let d = constraints.min_distance;
    let mut state: PenaltyState<P::Block> = PenaltyState {
        r: init.clone(),
        z: init.clone(),
        block: None,
        rho: config.schedule.rho0,
        objective_trace: Vec::new(),
        residual: 0.0,
    };
    let mut trace = Vec::new();
    let mut prev_penalized: Option<f64> = None;
    let mut converged = false;

    for outer in 0..config.max_outer {
        let rho = state.rho;
        let before_x = match &state.block {
            Some(b) => Some(penalized_objective(instance, &state.r, b, &state.z, rho)?),
            None => None,
        };

        let block = instance.solve_block(&state.r)?;
        let after_x = penalized_objective(instance, &state.r, &block, &state.z, rho)?;

        let mut obj = PenalizedObjective {
            instance,
            block: &block,
            z: &state.z,
            rho,
            gradient: config.gradient,
            fd_step: config.fd_step,
        };
        let pg = projected_gradient(&mut obj, &state.r, constraints, &config.pg)?;
        let r = pg.layout;
        let f_r = instance.objective(&r, &block)?;
        let after_r = f_r + rho * r.sq_distance_to(&state.z);

        let zsol = geometry::solve_z_subproblem(&r, &state.z, d, config.z_tol, config.z_max_sweeps)?;
        let residual = zsol.objective();
        let after_z = f_r + rho * residual;
        if !after_z.is_finite() {
            return Err(Error::NonFinite(format!(
                "penalized objective at outer iteration {outer} (trace so far: {:?})",
                trace.iter().map(|t: &IterationRecord| t.penalized).collect::<Vec<_>>()
            )));
        }

        trace.push(IterationRecord {
            rho,
            objective: f_r,
            penalized: after_z,
            residual,
            block_values: [before_x, Some(after_x), Some(after_r), Some(after_z)],
            pg_iterations: pg.iterations,
            z_sweeps: zsol.sweeps(),
        });
        state.r = r;
        state.z = zsol.z;
        state.block = Some(block);
        state.objective_trace.push(after_z);
        state.residual = residual;

        let stalled = prev_penalized
            .is_some_and(|prev| (after_z - prev).abs() <= config.rel_tol * prev.abs().max(f64::MIN_POSITIVE));
        prev_penalized = Some(after_z);
        if stalled && residual <= config.residual_tol {
            converged = true;
            break;
        }
        let grow = match config.schedule.mode {
            GrowthMode::PerIteration => true,
            GrowthMode::PerStall => stalled,
        };
        if grow {
            state.rho = config.schedule.next(state.rho);
        }
    }

    if !converged {
        log::warn!(
            "penalty AO hit the outer-iteration cap ({}) with residual {:.3e}",
            config.max_outer,
            state.residual
        );
    }
    let finalized = finalize_layout(&state.r, &state.z, constraints);
    let final_block = instance.solve_block(&finalized.layout)?;
    let final_objective = instance.objective(&finalized.layout, &final_block)?;
    Ok(SolverReport {
        final_layout: finalized.layout,
        final_objective,
        residual: state.residual,
        outer_iterations: trace.len(),
        trace,
        hit_iteration_cap: !converged,
        region_violation: finalized.region_violation,
    })
}
