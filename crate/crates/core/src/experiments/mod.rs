//! Experiment harness: config files, seeded sweeps, result files.

pub mod config;
pub mod demo;
pub mod output;
pub mod sweep;

pub use config::{parse_config, Case, ExperimentConfig, Scheme};
pub use output::{aggregate, emit_results, AggregateRow, OutputFormat, RESULTS_HEADER};
pub use sweep::{run_scheme, run_sweep, trial_seed, ResultRow, TrialProblem};
