//! Seeded Monte-Carlo sweeps over the region size.
//!
//! Every `(region index, trial)` cell draws one channel from a seed derived
//! from `(base_seed, region index, trial)` and evaluates every scheme on it,
//! so schemes are compared on common random numbers. Cells run in parallel
//! and the rows are sorted before they are returned.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{antenna_selection, fpa_layout, CandidateGrid};
use crate::channel::{MimoChannelModel, MisoUserModel};
use crate::error::{Error, Result};
use crate::experiments::config::{Case, ExperimentConfig, Scheme};
use crate::framework::{initialize_layout, run_penalty_ao, PlacementConstraints};
use crate::geometry::AntennaLayout;
use crate::problems::{CapacityProblem, RzfProblem};

/// Metric name used on rows whose run failed.
pub const ERROR_METRIC: &str = "error";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub case: Case,
    pub scheme: Scheme,
    #[serde(rename = "A_over_lambda")]
    pub a_over_lambda: f64,
    pub trial_seed: u64,
    pub metric_name: String,
    pub metric_value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub wall_time_ms: f64,
}

impl ResultRow {
    pub fn is_error(&self) -> bool {
        self.metric_name == ERROR_METRIC
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the channel drawn for one `(region index, trial)` cell.
pub fn trial_seed(base_seed: u64, region_index: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base_seed) ^ region_index as u64) ^ trial as u64)
}

/// The optimization problem of one cell.
#[derive(Debug, Clone)]
pub enum TrialProblem {
    Capacity(CapacityProblem),
    Rzf(RzfProblem),
}

impl TrialProblem {
    /// Draw the channel for `seed`.
    pub fn draw(config: &ExperimentConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(match config.case {
            Case::Capacity => {
                let model = MimoChannelModel::random(&mut rng, config.paths, config.n, config.full_path_response)?;
                TrialProblem::Capacity(CapacityProblem::new(model, config.noise_power, config.p_max)?)
            }
            Case::Rzf => {
                let users = (0..config.k)
                    .map(|_| MisoUserModel::random(&mut rng, config.paths, config.noise_power))
                    .collect::<Result<Vec<_>>>()?;
                TrialProblem::Rzf(RzfProblem::new(users, config.alpha)?)
            }
        })
    }

    /// Reported metric (capacity or sum rate) at `layout`.
    pub fn metric(&self, layout: &AntennaLayout) -> Result<f64> {
        match self {
            TrialProblem::Capacity(p) => p.capacity_at(layout),
            TrialProblem::Rzf(p) => p.sum_rate_at(layout),
        }
    }
}

/// What one scheme produced on one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub layout: AntennaLayout,
    pub metric: f64,
    pub iterations: usize,
    pub residual: f64,
}

/// Run `scheme` on a drawn problem.
pub fn run_scheme(
    scheme: Scheme,
    problem: &TrialProblem,
    config: &ExperimentConfig,
    constraints: &PlacementConstraints,
    seed: u64,
) -> Result<SchemeOutcome> {
    match scheme {
        Scheme::Ma => {
            let init = initialize_layout(config.m, constraints, splitmix64(seed ^ 0x4D41))?;
            let report = match problem {
                TrialProblem::Capacity(p) => run_penalty_ao(p, constraints, &init, &config.solver)?,
                TrialProblem::Rzf(p) => run_penalty_ao(p, constraints, &init, &config.solver)?,
            };
            let metric = problem.metric(&report.final_layout)?;
            Ok(SchemeOutcome {
                layout: report.final_layout,
                metric,
                iterations: report.outer_iterations,
                residual: report.residual,
            })
        }
        Scheme::Fpa => {
            let layout = fpa_layout(config.m, constraints)?;
            let metric = problem.metric(&layout)?;
            Ok(SchemeOutcome {
                layout,
                metric,
                iterations: 0,
                residual: 0.0,
            })
        }
        Scheme::As => {
            let grid = CandidateGrid::new(config.as_candidates, constraints)?;
            let sel = antenna_selection(&grid, config.m, |s| problem.metric(&grid.subset_layout(s)))?;
            Ok(SchemeOutcome {
                layout: grid.subset_layout(&sel.indices),
                metric: sel.score,
                iterations: sel.evaluations,
                residual: 0.0,
            })
        }
    }
}

fn run_cell(config: &ExperimentConfig, region_index: usize, trial: usize) -> Vec<((usize, usize, usize), ResultRow)> {
    let a = config.a_over_lambda[region_index];
    let seed = trial_seed(config.base_seed, region_index, trial);
    let setup = config
        .constraints(a)
        .and_then(|c| TrialProblem::draw(config, seed).map(|p| (c, p)));
    config
        .schemes
        .iter()
        .enumerate()
        .map(|(si, &scheme)| {
            let start = Instant::now();
            let outcome = setup
                .as_ref()
                .map_err(|e| Error::Config(e.to_string()))
                .and_then(|(c, p)| run_scheme(scheme, p, config, c, seed));
            let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            let row = match outcome {
                Ok(out) => ResultRow {
                    case: config.case,
                    scheme,
                    a_over_lambda: a,
                    trial_seed: seed,
                    metric_name: config.case.metric_name().to_string(),
                    metric_value: out.metric,
                    iterations: out.iterations,
                    residual: out.residual,
                    wall_time_ms,
                },
                Err(e) => {
                    log::error!("{} / {scheme} / A={a} / seed {seed}: {e}", config.case);
                    ResultRow {
                        case: config.case,
                        scheme,
                        a_over_lambda: a,
                        trial_seed: seed,
                        metric_name: ERROR_METRIC.to_string(),
                        metric_value: f64::NAN,
                        iterations: 0,
                        residual: f64::NAN,
                        wall_time_ms,
                    }
                }
            };
            ((si, region_index, trial), row)
        })
        .collect()
}

/// Run every `(region size, trial, scheme)` combination of `config`.
///
/// Failed runs become rows with metric name [`ERROR_METRIC`]. Rows are
/// ordered by scheme (as listed in the config), region size, then trial.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let cells: Vec<(usize, usize)> = (0..config.a_over_lambda.len())
        .flat_map(|ai| (0..config.num_trials).map(move |t| (ai, t)))
        .collect();
    let mut keyed: Vec<_> = cells
        .par_iter()
        .flat_map_iter(|&(ai, t)| run_cell(config, ai, t))
        .collect();
    keyed.sort_by_key(|(key, _)| *key);
    Ok(keyed.into_iter().map(|(_, row)| row).collect())
}
