//! Configuration, parameter sweeps and desk-scale verification used by the CLI.

mod config;
mod sweep;
mod verify;

pub use config::{Config, SweepConfig, VerifyConfig, CONFIG_ENV, SCHEMA_VERSION};
pub use sweep::{evaluate_point, run_sweep, sweep_points, sweep_schedules, to_csv, to_markdown, ReportRow, CSV_HEADER};
pub use verify::{run_verify, CheckResult, VerifyReport};

use crate::ckks::CkksError;
use crate::model::ModelError;
use crate::rns::RingError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("N = {n} exceeds the desk-scale limit {max}; pass --allow-large-n to override")]
    Guard { n: usize, max: usize },
    #[error("I/O error: {0}")]
    Io(String),
    #[error("inconsistent report: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Ckks(#[from] CkksError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl From<RingError> for HarnessError {
    fn from(e: RingError) -> Self {
        Self::Ckks(e.into())
    }
}
