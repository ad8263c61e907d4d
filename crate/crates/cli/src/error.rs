use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] hybrid_rank::Error),
    #[error("missing artifact {}: run `hybrid-rank {stage}` first", path.display())]
    MissingArtifact { path: PathBuf, stage: &'static str },
    #[error("invalid config: {0}")]
    Config(String),
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::MissingArtifact { .. } => "missing_artifact",
            CliError::Config(_) => "config",
        }
    }

    /// The single-line JSON written to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let mut err = json!({ "kind": self.kind(), "message": self.to_string() });
        if let CliError::MissingArtifact { path, stage } = self {
            err["path"] = json!(path.display().to_string());
            err["stage"] = json!(stage);
        }
        json!({ "error": err })
    }
}
