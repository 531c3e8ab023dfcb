//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "system": { "kind": "named", "name": "petersen_weighted", "dt": 0.1 },
//!   "initial_condition": { "kind": "gaussian" },
//!   "steps": 15,
//!   "seed": 0
//! }
//! ```

use std::path::{Path, PathBuf};

use regcert_core::DEFAULT_RANK_TOLERANCE;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub system: SystemSource,
    #[serde(default)]
    pub initial_condition: InitialConditionSpec,
    pub steps: usize,
    /// Relative singular-value cutoff for the numeric rank.
    #[serde(default = "default_tolerance")]
    pub rank_tolerance: f64,
    /// Error norms listed in the report table; the CSV always has both.
    #[serde(default = "default_norms")]
    pub norms: Vec<Norm>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Drives the orthogonal factor of a synthesized spectrum and the
    /// Gaussian initial condition.
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSource {
    /// The discrete matrix `A`, row by row.
    Matrix { rows: Vec<Vec<f64>> },
    /// Symmetric `A` with this spectrum and a seeded orthogonal basis.
    Spectrum { values: Vec<f64> },
    Named {
        name: NamedSystem,
        #[serde(default = "default_dt")]
        dt: f64,
    },
    /// `A = exp(-dt * G)` for the generator `G`, row by row.
    Generator { rows: Vec<Vec<f64>>, dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedSystem {
    PetersenWeighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConditionSpec {
    Vector {
        values: Vec<f64>,
    },
    /// Seeded standard Gaussian scaled to unit norm. Listed eigenvector
    /// indices (largest magnitude first) are projected out afterwards; this
    /// needs a symmetric system.
    Gaussian {
        #[serde(default)]
        orthogonal_to_modes: Vec<usize>,
    },
}

impl Default for InitialConditionSpec {
    fn default() -> Self {
        InitialConditionSpec::Gaussian { orthogonal_to_modes: Vec::new() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Norm {
    Spectral,
    Frobenius,
}

fn default_tolerance() -> f64 {
    DEFAULT_RANK_TOLERANCE
}

fn default_norms() -> Vec<Norm> {
    vec![Norm::Spectral, Norm::Frobenius]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_dt() -> f64 {
    0.1
}

/// Command-line values that replace config fields.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub rank_tolerance: Option<f64>,
}

/// The shipped weighted Petersen experiment.
pub const PETERSEN_DEMO: &str = include_str!("../../../configs/petersen.json");

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            CliError::config(if field == "." { "(root)".to_string() } else { field }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Result<Self> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(steps) = o.steps {
            self.steps = steps;
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = dir.clone();
        }
        if let Some(tol) = o.rank_tolerance {
            self.rank_tolerance = tol;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(CliError::config("steps", "must be at least 1"));
        }
        if !self.rank_tolerance.is_finite() || self.rank_tolerance < 0.0 {
            return Err(CliError::config("rank_tolerance", "must be finite and non-negative"));
        }
        if self.norms.is_empty() {
            return Err(CliError::config("norms", "list at least one norm"));
        }
        match &self.system {
            SystemSource::Matrix { rows } => square("system.rows", rows)?,
            SystemSource::Generator { rows, dt } => {
                square("system.rows", rows)?;
                positive_dt(*dt)?;
            }
            SystemSource::Named { dt, .. } => positive_dt(*dt)?,
            SystemSource::Spectrum { values } => {
                if values.is_empty() {
                    return Err(CliError::config("system.values", "spectrum is empty"));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(CliError::config("system.values", "entries must be finite"));
                }
            }
        }
        if let InitialConditionSpec::Vector { values } = &self.initial_condition {
            if values.iter().any(|v| !v.is_finite()) {
                return Err(CliError::config("initial_condition.values", "entries must be finite"));
            }
            if values.iter().all(|&v| v == 0.0) {
                return Err(CliError::config("initial_condition.values", "x0 must be nonzero"));
            }
        }
        Ok(())
    }
}

fn square(field: &str, rows: &[Vec<f64>]) -> Result<()> {
    let n = rows.len();
    if n == 0 {
        return Err(CliError::config(field, "matrix is empty"));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(CliError::config(format!("{field}[{i}]"), format!("has {} entries, expected {n}", r.len())));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(CliError::config(format!("{field}[{i}][{j}]"), "entry must be finite"));
        }
    }
    Ok(())
}

fn positive_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(CliError::config("system.dt", format!("must be positive, got {dt}")))
    }
}
