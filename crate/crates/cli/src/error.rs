use serde_json::json;
use thiserror::Error;

use twon_core::ingest::IngestError;
use twon_core::likelihood::LikelihoodError;
use twon_core::mechanics::MechanicsError;
use twon_core::metrics::MetricError;
use twon_core::model::ModelError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("runtime: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Data(_) => "data",
            CliError::Runtime(_) => "runtime",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Data(m) | CliError::Runtime(m) => m,
        }
    }

    /// Machine-readable form written to stderr on failure.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.message(),
            }
        })
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Embedding(_) => CliError::Runtime(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<LikelihoodError> for CliError {
    fn from(e: LikelihoodError) -> Self {
        match e {
            LikelihoodError::Diverged { .. } | LikelihoodError::Io(_) => CliError::Runtime(e.to_string()),
            LikelihoodError::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<MechanicsError> for CliError {
    fn from(e: MechanicsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<MetricError> for CliError {
    fn from(e: MetricError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::TranscriptFormat { .. } => CliError::Data(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}
