//! Movable-antenna position optimization under a minimum pairwise spacing
//! constraint.
//!
//! The positions are split into a decision copy `r` (which only sees the
//! placement region) and an auxiliary copy `z` (which carries the spacing
//! constraint). A quadratic penalty `rho * sum ||r_m - z_m||^2` couples them
//! and the three blocks (case-specific variable, `r`, `z`) are updated in turn
//! while `rho` grows.
//!
//! Module map:
//! - [`geometry`]: exact projection of a point out of a union of disks and the
//!   sequential `z` sweep.
//! - [`channel`]: field-response channel models and their position Jacobians.
//! - [`solvers`]: water-filling, RZF precoding, metrics, projected gradient.
//! - [`problems`]: the capacity and RZF case studies as [`framework::ProblemInstance`]s.
//! - [`framework`]: the penalty alternating-optimization engine.
//! - [`baselines`]: fixed-position and antenna-selection references.
//! - [`experiments`]: config parsing, Monte-Carlo sweeps and result output.
//!
//! All lengths are expressed in wavelengths.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod framework;
pub mod geometry;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
pub use framework::PlacementConstraints;
pub use geometry::{AntennaLayout, Point2};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dynamically sized complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
