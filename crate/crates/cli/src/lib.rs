//! Experiment runner: builds a system from a JSON config, streams its
//! snapshots through the online regression, certifies every step and
//! writes CSV records, a report and a plot script.

pub mod config;
pub mod error;
pub mod experiment;
pub mod external;
pub mod output;

pub use config::{ExperimentConfig, Overrides};
pub use error::{CliError, Result};
pub use experiment::{run, RunOutput, StepRecord};
pub use external::{fit_external, ExternalFit, FitRecord};
