//! Experiment runner for `hopf-tda`: JSON configs, CSV/JSON/SVG artifacts.

pub mod config;
mod error;
pub mod io;
pub mod run;
pub mod svg;

pub use config::{cases, ExperimentConfig};
pub use error::{CliError, Result};
pub use run::{lyapunov_grid, run_case, CaseReport, LevelReport};
