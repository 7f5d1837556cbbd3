use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] restart_grade::Error),

    #[error("{failed} of {total} checks failed")]
    ChecksFailed { failed: usize, total: usize },

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    /// Machine-readable form written to standard error.
    pub fn to_json(&self) -> serde_json::Value {
        let (kind, module) = match self {
            CliError::Config(_) => ("config", "cli"),
            CliError::Core(e) => (e.kind(), e.module()),
            CliError::ChecksFailed { .. } => ("checks-failed", "verify"),
            CliError::Io(_) => ("io", "cli"),
            CliError::Json(_) => ("json", "cli"),
            CliError::Csv(_) => ("csv", "cli"),
        };
        json!({ "error": { "kind": kind, "module": module, "message": self.to_string() } })
    }
}
