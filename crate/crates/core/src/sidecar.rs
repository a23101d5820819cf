//! Wire schema and blocking client for the optional inference sidecar.
//!
//! The sidecar serves three JSON endpoints (`/generate`, `/embed`, `/labels`)
//! plus `/healthz`. Every response is validated before it is handed to the
//! rest of the crate, and failed requests are retried with exponential backoff.

use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateConstraint {
    pub reply_only: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f64,
    pub constraint: GenerateConstraint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub text: String,
    /// Set by the sidecar's heuristic when the output does not address the post.
    #[serde(default)]
    pub top_level: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedRequest {
    pub texts: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbedResponse {
    pub vectors: Vec<Vec<f64>>,
    pub d: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelsRequest {
    pub texts: Vec<String>,
    pub category: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelsResponse {
    /// One row per input text, one column per subclass.
    pub scores: Vec<Vec<f64>>,
    pub subclass_names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HealthResponse {
    pub version: String,
    pub d: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SidecarError {
    #[error("request to {url} failed after {attempts} attempt(s): {message}")]
    Transport {
        url: String,
        attempts: u32,
        message: String,
    },
    #[error("{url} returned a response that violates the schema: {reason}")]
    Schema { url: String, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Additional attempts after the first one.
    pub max_retries: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_retries: 3,
            base_delay_ms: 200,
            max_delay_ms: 5_000,
        }
    }
}

impl RetryPolicy {
    pub fn delay(&self, attempt: u32) -> Duration {
        let factor = 1u64.checked_shl(attempt).unwrap_or(u64::MAX);
        Duration::from_millis(self.base_delay_ms.saturating_mul(factor).min(self.max_delay_ms))
    }
}

/// Counting gate that bounds concurrent requests.
#[derive(Debug)]
struct Gate {
    cap: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    fn new(cap: usize) -> Self {
        Self {
            cap: cap.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    fn enter(&self) -> GatePass<'_> {
        let mut active = self.active.lock().expect("gate poisoned");
        while *active >= self.cap {
            active = self.freed.wait(active).expect("gate poisoned");
        }
        *active += 1;
        GatePass(self)
    }
}

struct GatePass<'a>(&'a Gate);

impl Drop for GatePass<'_> {
    fn drop(&mut self) {
        *self.0.active.lock().expect("gate poisoned") -= 1;
        self.0.freed.notify_one();
    }
}

#[derive(Debug)]
pub struct SidecarClient {
    base_url: String,
    agent: ureq::Agent,
    retry: RetryPolicy,
    gate: Gate,
}

impl SidecarClient {
    pub fn new(base_url: impl Into<String>, timeout: Duration, retry: RetryPolicy, max_in_flight: usize) -> Self {
        let base_url = base_url.into().trim_end_matches('/').to_owned();
        Self {
            base_url,
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
            retry,
            gate: Gate::new(max_in_flight),
        }
    }

    pub fn base_url(&self) -> &str {
        &self.base_url
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        self.retry
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.base_url, path)
    }

    /// POSTs `body` (or GETs when `body` is `None`) with retries on transport
    /// failures, non-success statuses and undecodable bodies.
    fn call<B: Serialize, T: DeserializeOwned>(&self, path: &str, body: Option<&B>) -> Result<T, SidecarError> {
        let url = self.url(path);
        let _pass = self.gate.enter();
        let mut last = String::new();
        for attempt in 0..=self.retry.max_retries {
            if attempt > 0 {
                thread::sleep(self.retry.delay(attempt - 1));
            }
            let outcome = match body {
                Some(b) => self.agent.post(&url).send_json(b),
                None => self.agent.get(&url).call(),
            };
            match outcome {
                Ok(resp) => match resp.into_json::<T>() {
                    Ok(v) => return Ok(v),
                    Err(e) => last = format!("malformed body: {e}"),
                },
                Err(ureq::Error::Status(code, resp)) => {
                    let detail = resp.into_string().unwrap_or_default();
                    last = format!("status {code}: {detail}");
                }
                Err(e) => last = e.to_string(),
            }
            log::debug!("{url} attempt {} failed: {last}", attempt + 1);
        }
        Err(SidecarError::Transport {
            url,
            attempts: self.retry.max_retries + 1,
            message: last,
        })
    }

    pub fn generate(&self, request: &GenerateRequest) -> Result<GenerateResponse, SidecarError> {
        self.call("generate", Some(request))
    }

    pub fn embed(&self, texts: &[String]) -> Result<EmbedResponse, SidecarError> {
        let resp: EmbedResponse = self.call("embed", Some(&EmbedRequest { texts: texts.to_vec() }))?;
        validate_embed(&resp, texts.len()).map_err(|reason| SidecarError::Schema {
            url: self.url("embed"),
            reason,
        })?;
        Ok(resp)
    }

    pub fn labels(&self, texts: &[String], category: &str) -> Result<LabelsResponse, SidecarError> {
        let req = LabelsRequest {
            texts: texts.to_vec(),
            category: category.to_owned(),
        };
        let resp: LabelsResponse = self.call("labels", Some(&req))?;
        validate_labels(&resp, texts.len()).map_err(|reason| SidecarError::Schema {
            url: self.url("labels"),
            reason,
        })?;
        Ok(resp)
    }

    pub fn health(&self) -> Result<HealthResponse, SidecarError> {
        self.call::<(), HealthResponse>("healthz", None)
    }
}

pub fn validate_embed(resp: &EmbedResponse, expected_rows: usize) -> Result<(), String> {
    if resp.vectors.len() != expected_rows {
        return Err(format!("expected {expected_rows} vectors, got {}", resp.vectors.len()));
    }
    if resp.d == 0 {
        return Err("d must be positive".into());
    }
    for (i, v) in resp.vectors.iter().enumerate() {
        if v.len() != resp.d {
            return Err(format!("vector {i} has length {} but d = {}", v.len(), resp.d));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(format!("vector {i} has a non-finite entry"));
        }
    }
    Ok(())
}

pub fn validate_labels(resp: &LabelsResponse, expected_rows: usize) -> Result<(), String> {
    if resp.subclass_names.is_empty() {
        return Err("subclass_names is empty".into());
    }
    if resp.scores.len() != expected_rows {
        return Err(format!(
            "expected {expected_rows} score rows, got {}",
            resp.scores.len()
        ));
    }
    for (i, row) in resp.scores.iter().enumerate() {
        if row.len() != resp.subclass_names.len() {
            return Err(format!(
                "row {i} has {} scores for {} subclasses",
                row.len(),
                resp.subclass_names.len()
            ));
        }
        if row.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(format!("row {i} has a score outside [0, 1]"));
        }
    }
    Ok(())
}
