//! Experiment harness for the hybrid-spectral wave solver: configuration,
//! study runners and machine-readable outputs.

pub mod config;
pub mod error;
pub mod output;
pub mod studies;

pub use config::{ExperimentConfig, ExperimentKind, Format};
pub use error::{Error, Result};
pub use output::{emit_outputs, Cell, StudyResult, Table};
pub use studies::run_study;
