//! Raw sample loading, preprocessing filters, and dataset construction.

mod dataset;
mod embed;
mod filter;

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::Language;

pub use dataset::{
    build_likelihood_dataset, build_reply_pairs, check_balance, select_active_users, split, LikelihoodBuild,
    SkippedUser,
};
pub use embed::{EmbeddingSource, FixtureEmbeddings, HashingEmbedder, RemoteEmbedder};
pub use filter::{filter_corpus, filter_sample, DropReason, Verdict, DEFAULT_MIN_CHARS, URL_PATTERN};

pub const DEFAULT_TOP_K: usize = 50;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Post,
    Reply,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSample {
    pub user_id: String,
    pub text: String,
    pub kind: SampleKind,
    #[serde(default)]
    pub reply_to_text: Option<String>,
    #[serde(default)]
    pub topic: Option<String>,
    pub language: Language,
    pub timestamp: i64,
}

impl RawSample {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.kind == SampleKind::Reply && self.reply_to_text.as_deref().is_none_or(|t| t.trim().is_empty()) {
            return Err(IngestError::Invalid(format!(
                "reply by {} lacks reply_to_text",
                self.user_id
            )));
        }
        Ok(())
    }
}

/// Samples removed per filter rule.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub input: usize,
    pub dropped: BTreeMap<DropReason, usize>,
}

impl Provenance {
    pub fn total_dropped(&self) -> usize {
        self.dropped.values().sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub samples: Vec<RawSample>,
    pub provenance: Provenance,
}

impl Corpus {
    pub fn new(samples: Vec<RawSample>) -> Self {
        let provenance = Provenance {
            input: samples.len(),
            dropped: BTreeMap::new(),
        };
        Self { samples, provenance }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Distinct user ids in lexicographic order.
    pub fn users(&self) -> Vec<String> {
        let mut users: Vec<String> = self.samples.iter().map(|s| s.user_id.clone()).collect();
        users.sort_unstable();
        users.dedup();
        users
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, IngestError> {
        let mut samples = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| IngestError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let sample: RawSample = serde_json::from_str(&line).map_err(|e| IngestError::Format {
                line: i + 1,
                reason: e.to_string(),
            })?;
            sample.validate()?;
            samples.push(sample);
        }
        Ok(Self::new(samples))
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), IngestError> {
        for s in &self.samples {
            let line = serde_json::to_string(s).map_err(|e| IngestError::Io(e.to_string()))?;
            writeln!(out, "{line}").map_err(|e| IngestError::Io(e.to_string()))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("invalid sample: {0}")]
    Invalid(String),
    #[error("line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("embedding: {0}")]
    Embedding(String),
    #[error("dataset is not label-balanced for user {user}: {positives} positive vs {negatives} negative")]
    Unbalanced {
        user: String,
        positives: usize,
        negatives: usize,
    },
    #[error("io: {0}")]
    Io(String),
}
