use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error("experiment failed: {0}")]
    ExperimentFailed(#[from] shearsparse_core::Error),

    /// A run-time check of the experiment's own output failed.
    #[error("experiment failed: {0}")]
    InvariantViolated(String),

    #[error("corrupt manifest {}: {reason}", path.display())]
    ManifestCorrupt { path: PathBuf, reason: String },

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        CliError::ConfigInvalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn corrupt(path: &Path, reason: impl Into<String>) -> Self {
        CliError::ManifestCorrupt {
            path: path.to_path_buf(),
            reason: reason.into(),
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigInvalid { .. } => "ConfigInvalid",
            CliError::ExperimentFailed(_) | CliError::InvariantViolated(_) => "ExperimentFailed",
            CliError::ManifestCorrupt { .. } => "ManifestCorrupt",
            CliError::Io { .. } => "Io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigInvalid { .. } => 2,
            CliError::ExperimentFailed(_) | CliError::InvariantViolated(_) => 3,
            CliError::ManifestCorrupt { .. } => 4,
            CliError::Io { .. } => 5,
        }
    }

    /// One-line JSON error record for stderr.
    pub fn record(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::ConfigInvalid { field, .. } => v["field"] = json!(field),
            CliError::ManifestCorrupt { path, .. } | CliError::Io { path, .. } => {
                v["path"] = json!(path.display().to_string())
            }
            CliError::ExperimentFailed(e) => v["cause"] = json!(format!("{e:?}").split(['(', ' ', '{']).next().unwrap_or("")),
            CliError::InvariantViolated(_) => v["cause"] = json!("InvariantViolated"),
        }
        v.to_string()
    }
}
