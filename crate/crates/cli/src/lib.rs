//! Batch experiment runner for shearlet sparse-approximation studies.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod plot;
pub mod summarize;
pub mod tools;

pub use config::{ExperimentConfig, ExperimentKind, Scene};
pub use error::{CliError, Result};
pub use experiments::{run, RunOutcome};
pub use manifest::{Manifest, VerifiedManifest};
pub use summarize::{summarize, Summary};
