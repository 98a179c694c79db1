//! Experiment harness around the `qkl` estimation library: built-in figure
//! configurations, claim checks, parameter searches and realizability
//! reports, all driven by JSON configs and emitting CSV/JSON.

pub mod check;
pub mod claims;
pub mod config;
pub mod figures;
pub mod search;

use thiserror::Error;

pub use check::{check_system, CheckInput, SystemCheck};
pub use claims::{verify_claims, ClaimId, ClaimReport, ClaimStatus, Reading};
pub use config::{resolve_tolerance, Experiment, ExperimentConfig, GridSpec, SystemConfig};
pub use figures::{reference_configurations, run_figure, FigureId};
pub use search::{grid_search, SearchConfig, SearchOutcome};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] qkl::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;
