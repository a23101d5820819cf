//! Reply-likelihood scorer.
//!
//! Two branches of two stacked square ReLU layers embed the history rows and
//! the post independently. The post representation is broadcast over the
//! history rows and multiplied element-wise; the interaction is mean-pooled
//! over rows and fed to a logistic output unit.
//!
//! ```text
//! H' = relu(relu(H·Wh1 + bh1)·Wh2 + bh2)          (n × d)
//! p' = relu(relu(p·Wp1 + bp1)·Wp2 + bp2)          (1 × d)
//! score = sigmoid(w_out · mean_rows(H' ⊙ p') + b_out)
//! ```

mod eval;
mod network;
mod optim;
mod params;
mod persist;
pub mod synthetic;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{evaluate_classifier, ClassifierReport, DEFAULT_THRESHOLD};
pub use network::{forward, loss_and_grad, loss_only};
pub use optim::{AdamW, AdamWConfig};
pub use params::ScorerParams;
pub use persist::{
    decode_params, encode_params, read_params, write_params, ParamsSidecar, PARAMS_MAGIC, PARAMS_VERSION,
};
pub use train::{train, TrainConfig, TrainedScorer};

pub const DEFAULT_DIM: usize = 768;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingVector(pub Vec<f64>);

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self, LikelihoodError> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LikelihoodError::NonFinite("embedding entry".into()));
        }
        Ok(Self(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LikelihoodExample {
    /// Owning user, when known; used for per-user balance checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<String>,
    pub history: Vec<EmbeddingVector>,
    pub post: EmbeddingVector,
    pub label: u8,
}

impl LikelihoodExample {
    pub fn new(history: Vec<EmbeddingVector>, post: EmbeddingVector, label: u8) -> Self {
        Self {
            user: None,
            history,
            post,
            label,
        }
    }

    pub fn with_user(mut self, user: impl Into<String>) -> Self {
        self.user = Some(user.into());
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LikelihoodError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("label must be 0 or 1, got {0}")]
    Label(u8),
    #[error("empty batch")]
    EmptyBatch,
    #[error("empty dataset")]
    EmptyDataset,
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("training diverged in epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("params file: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for LikelihoodError {
    fn from(e: std::io::Error) -> Self {
        LikelihoodError::Io(e.to_string())
    }
}
