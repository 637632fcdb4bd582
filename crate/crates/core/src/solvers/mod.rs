//! Per-block solvers and metrics.

mod linalg;
pub mod metrics;
pub mod precoding;
pub mod projected_gradient;
pub mod water_filling;

pub use metrics::{capacity, sum_rate};
pub use precoding::{rzf_objective, rzf_precoder, RzfInstance};
pub use projected_gradient::{
    project_to_region, projected_gradient, DifferentiableObjective, FnObjective, PgConfig, PgOutcome,
};
pub use water_filling::{water_filling, WaterFillingResult};

pub(crate) use linalg::{hermitian_part, log_det_hpd};
