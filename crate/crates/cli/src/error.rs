use std::path::Path;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] depeg_core::Error),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("missing input {0}; run the upstream command first")]
    Missing(String),
}

impl CliError {
    pub fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
        if !path.exists() {
            return CliError::Missing(path.display().to_string());
        }
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        use depeg_core::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Input(_) => "input",
                E::Params(_) => "params",
                E::Construction(_) => "construction",
                E::Domain(_) => "domain",
                E::Infeasible(_) => "infeasible",
                E::Unsupported(_) => "unsupported",
                E::Parse(_) => "parse",
                E::Io(_) => "io",
            },
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Missing(_) => "missing_input",
        }
    }

    /// 2 for bad configuration or inputs, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "config" | "params" | "input" | "parse" | "missing_input" => 2,
            _ => 1,
        }
    }

    pub fn record(&self) -> serde_json::Value {
        json!({ "error": { "kind": self.kind(), "message": self.to_string() } })
    }
}
