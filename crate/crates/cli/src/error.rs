use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] coarse_core::Error),
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed JSON in {what}: {message}")]
    Json { what: String, message: String },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: impl std::fmt::Display, e: std::io::Error) -> Self {
        CliError::Io { path: path.to_string(), message: e.to_string() }
    }

    pub fn json(what: impl Into<String>, e: serde_json::Error) -> Self {
        CliError::Json { what: what.into(), message: e.to_string() }
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// Machine-readable form: `{"error": kind, "message": ..., ...}`.
    pub fn to_json(&self) -> Value {
        let mut v = match self {
            CliError::Core(e) => serde_json::to_value(e).unwrap_or_else(|_| json!({"error": "core"})),
            CliError::Io { path, .. } => json!({"error": "io", "path": path}),
            CliError::Json { what, .. } => json!({"error": "malformed-json", "what": what}),
            CliError::Usage(_) => json!({"error": "usage"}),
        };
        v["message"] = Value::String(self.to_string());
        v
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
