//! Command-line front end for the DDL adaptive-detection simulator:
//! configuration parsing, experiment runners, and the Taylor-windowed
//! CA-CFAR baseline.

pub mod cfar;
pub mod config;
pub mod error;
pub mod experiments;

pub use config::{canonical_text, parse_config, ExperimentConfig, ExperimentKind};
pub use error::{CliError, Result};
pub use experiments::run_experiment;
