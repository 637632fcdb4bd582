//! Experiment configuration, stored as TOML.
//!
//! Only `case` is required. Every other key falls back to the defaults below;
//! unknown keys are rejected.
//!
//! ```toml
//! case = "capacity"          # or "rzf"
//! m = 4                      # movable antennas at the base station
//! n = 4                      # device ULA antennas (capacity case)
//! k = 4                      # single-antenna users (rzf case)
//! paths = 10                 # propagation paths per link / user
//! a_over_lambda = [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
//! d_over_lambda = 0.5
//! p_max = 10.0               # power budget (capacity case)
//! noise_power = 1.0
//! alpha = 6.0                # RZF regularization
//! num_trials = 50
//! base_seed = 0
//! schemes = ["ma", "fpa", "as"]
//! as_candidates = 8
//! full_path_response = false
//!
//! [solver]                   # optional, see FrameworkConfig
//! rel_tol = 1e-3
//! [solver.schedule]
//! rho0 = 5.0
//! growth = 1.2
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::framework::{FrameworkConfig, PlacementConstraints};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Capacity,
    Rzf,
}

impl Case {
    pub fn as_str(&self) -> &'static str {
        match self {
            Case::Capacity => "capacity",
            Case::Rzf => "rzf",
        }
    }

    pub fn metric_name(&self) -> &'static str {
        match self {
            Case::Capacity => "capacity_bps_hz",
            Case::Rzf => "sum_rate_bps_hz",
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Movable antennas optimized by the penalty framework.
    Ma,
    /// Fixed-position antennas.
    Fpa,
    /// Antenna selection from a fixed candidate grid.
    As,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Ma, Scheme::Fpa, Scheme::As];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Ma => "ma",
            Scheme::Fpa => "fpa",
            Scheme::As => "as",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ma" => Ok(Scheme::Ma),
            "fpa" => Ok(Scheme::Fpa),
            "as" => Ok(Scheme::As),
            other => Err(Error::Config(format!(
                "unknown scheme `{other}` (expected ma, fpa or as)"
            ))),
        }
    }
}

fn default_m() -> usize {
    4
}
fn default_n() -> usize {
    4
}
fn default_k() -> usize {
    4
}
fn default_paths() -> usize {
    10
}
fn default_sweep() -> Vec<f64> {
    vec![1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0]
}
fn default_d() -> f64 {
    0.5
}
fn default_p_max() -> f64 {
    10.0
}
fn default_noise() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    6.0
}
fn default_trials() -> usize {
    50
}
fn default_schemes() -> Vec<Scheme> {
    Scheme::ALL.to_vec()
}
fn default_as_candidates() -> usize {
    8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub case: Case,
    #[serde(default = "default_m")]
    pub m: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_paths")]
    pub paths: usize,
    #[serde(default = "default_sweep")]
    pub a_over_lambda: Vec<f64>,
    #[serde(default = "default_d")]
    pub d_over_lambda: f64,
    #[serde(default = "default_p_max")]
    pub p_max: f64,
    #[serde(default = "default_noise")]
    pub noise_power: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_trials")]
    pub num_trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_schemes")]
    pub schemes: Vec<Scheme>,
    #[serde(default = "default_as_candidates")]
    pub as_candidates: usize,
    #[serde(default)]
    pub full_path_response: bool,
    #[serde(default)]
    pub solver: FrameworkConfig,
}

impl ExperimentConfig {
    /// All defaults for the given case.
    pub fn for_case(case: Case) -> Self {
        Self {
            case,
            m: default_m(),
            n: default_n(),
            k: default_k(),
            paths: default_paths(),
            a_over_lambda: default_sweep(),
            d_over_lambda: default_d(),
            p_max: default_p_max(),
            noise_power: default_noise(),
            alpha: default_alpha(),
            num_trials: default_trials(),
            base_seed: 0,
            schemes: default_schemes(),
            as_candidates: default_as_candidates(),
            full_path_response: false,
            solver: FrameworkConfig::default(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        fn positive_count(name: &str, v: usize) -> Result<()> {
            if v == 0 {
                return Err(Error::Config(format!("`{name}` must be at least 1, got 0")));
            }
            Ok(())
        }
        fn positive(name: &str, v: f64) -> Result<()> {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("`{name}` must be in (0, inf), got {v}")));
            }
            Ok(())
        }
        positive_count("m", self.m)?;
        positive_count("n", self.n)?;
        positive_count("k", self.k)?;
        positive_count("paths", self.paths)?;
        positive_count("num_trials", self.num_trials)?;
        if self.a_over_lambda.is_empty() {
            return Err(Error::Config(
                "`a_over_lambda` must list at least one region size".into(),
            ));
        }
        for &a in &self.a_over_lambda {
            positive("a_over_lambda", a)?;
        }
        positive("d_over_lambda", self.d_over_lambda)?;
        positive("p_max", self.p_max)?;
        positive("noise_power", self.noise_power)?;
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::Config(format!(
                "`alpha` must be in [0, inf), got {}",
                self.alpha
            )));
        }
        if self.schemes.is_empty() {
            return Err(Error::Config("`schemes` must name at least one of ma, fpa, as".into()));
        }
        if self.schemes.contains(&Scheme::As) && self.as_candidates < self.m {
            return Err(Error::Config(format!(
                "`as_candidates` must be at least m = {}, got {}",
                self.m, self.as_candidates
            )));
        }
        self.solver.validate()
    }

    /// Region and spacing for one sweep point.
    pub fn constraints(&self, a_over_lambda: f64) -> Result<PlacementConstraints> {
        PlacementConstraints::new(a_over_lambda, self.d_over_lambda)
    }
}

/// Read and validate a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml_str(&text).map_err(|e| {
        Error::Config(format!(
            "{}: {}",
            path.display(),
            e.to_string().trim_start_matches("config error: ")
        ))
    })
}
