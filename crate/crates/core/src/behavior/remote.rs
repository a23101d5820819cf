//! Text generation through the sidecar's `/generate` endpoint.

use std::time::Duration;

use thiserror::Error;

use super::prompt::Prompt;
use crate::sidecar::{GenerateConstraint, GenerateRequest, RetryPolicy, SidecarClient, SidecarError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RemoteError {
    #[error("prompt {prompt_id}: {source}")]
    Transport {
        prompt_id: String,
        #[source]
        source: SidecarError,
    },
    #[error("prompt {prompt_id}: {reason}")]
    Generation { prompt_id: String, reason: String },
}

#[derive(Debug)]
pub struct RemoteGenerator {
    client: SidecarClient,
    pub max_tokens: u32,
    pub temperature: f64,
}

impl RemoteGenerator {
    pub fn new(client: SidecarClient) -> Self {
        Self {
            client,
            max_tokens: 64,
            temperature: 0.7,
        }
    }

    pub fn client(&self) -> &SidecarClient {
        &self.client
    }

    /// Sends `prompt` and returns non-empty text.
    ///
    /// Transport failures are retried inside the client. For reply-only
    /// prompts an output the sidecar labels as top-level is regenerated up to
    /// the same retry budget before giving up.
    pub fn generate(&self, prompt: &Prompt) -> Result<String, RemoteError> {
        let prompt_id = prompt.id();
        let request = GenerateRequest {
            prompt: prompt.rendered_text.clone(),
            max_tokens: self.max_tokens,
            temperature: self.temperature,
            constraint: GenerateConstraint {
                reply_only: prompt.is_reply_only(),
            },
        };
        let attempts = self.client.retry_policy().max_retries + 1;
        for _ in 0..attempts {
            let response = self
                .client
                .generate(&request)
                .map_err(|source| RemoteError::Transport {
                    prompt_id: prompt_id.clone(),
                    source,
                })?;
            let text = response.text.trim();
            if text.is_empty() {
                return Err(RemoteError::Generation {
                    prompt_id,
                    reason: "sidecar returned empty text".into(),
                });
            }
            if prompt.is_reply_only() && response.top_level {
                log::debug!("prompt {prompt_id}: top-level output rejected, regenerating");
                continue;
            }
            return Ok(text.to_owned());
        }
        Err(RemoteError::Generation {
            prompt_id,
            reason: format!("reply-only constraint violated in all {attempts} attempt(s)"),
        })
    }
}

/// One-shot generation against `endpoint` with the default retry policy.
pub fn remote_generate(endpoint: &str, prompt: &Prompt, timeout: Duration) -> Result<String, RemoteError> {
    RemoteGenerator::new(SidecarClient::new(endpoint, timeout, RetryPolicy::default(), 1)).generate(prompt)
}
