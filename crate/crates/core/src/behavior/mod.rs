//! The behavior function: what an agent sends given its state and curated feed.
//!
//! Providers implement [`BehaviorProvider`]. Three ship with the crate: a
//! deterministic stub, a Markov-chain baseline, and a client for a remote
//! generator served by the sidecar.

pub mod markov;
pub mod prompt;
pub mod provider;
pub mod remote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{AgentState, Message};

pub use markov::{MarkovError, MarkovModel};
pub use prompt::{Constraint, Prompt, PromptError, PromptTask, TemplateSet};
pub use provider::{MarkovProvider, RemoteProvider, StubMode, StubProvider};
pub use remote::{remote_generate, RemoteError, RemoteGenerator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    #[serde(alias = "EN")]
    En,
    #[serde(alias = "DE")]
    De,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::En => "en",
            Language::De => "de",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Persona {
    pub name: String,
    pub party: String,
    pub language: Language,
}

impl Persona {
    pub fn new(name: impl Into<String>, party: impl Into<String>, language: Language) -> Result<Self, PromptError> {
        let persona = Self {
            name: name.into(),
            party: party.into(),
            language,
        };
        persona.validate()?;
        Ok(persona)
    }

    pub fn validate(&self) -> Result<(), PromptError> {
        if self.name.trim().is_empty() || self.party.trim().is_empty() {
            return Err(PromptError::Input("persona name and party must be non-empty".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyPair {
    pub post: String,
    pub reply: String,
}

/// Few-shot `<post, reply>` pairs for one user, oldest first, capped at `max_pairs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyHistory {
    pairs: Vec<ReplyPair>,
    max_pairs: usize,
}

impl ReplyHistory {
    pub fn new(max_pairs: usize) -> Result<Self, PromptError> {
        if max_pairs == 0 {
            return Err(PromptError::Input("max_pairs must be positive".into()));
        }
        Ok(Self {
            pairs: Vec::new(),
            max_pairs,
        })
    }

    /// Keeps the `max_pairs` most recent of `pairs` (given oldest first).
    pub fn from_pairs<I, P, R>(pairs: I, max_pairs: usize) -> Result<Self, PromptError>
    where
        I: IntoIterator<Item = (P, R)>,
        P: Into<String>,
        R: Into<String>,
    {
        let mut history = Self::new(max_pairs)?;
        for (post, reply) in pairs {
            history.push(post, reply)?;
        }
        Ok(history)
    }

    /// Appends the newest pair, evicting the oldest one when full.
    pub fn push(&mut self, post: impl Into<String>, reply: impl Into<String>) -> Result<(), PromptError> {
        let (post, reply) = (post.into(), reply.into());
        if post.trim().is_empty() || reply.trim().is_empty() {
            return Err(PromptError::Input("history texts must be non-empty".into()));
        }
        if self.pairs.len() == self.max_pairs {
            self.pairs.remove(0);
        }
        self.pairs.push(ReplyPair { post, reply });
        Ok(())
    }

    pub fn pairs(&self) -> &[ReplyPair] {
        &self.pairs
    }

    pub fn max_pairs(&self) -> usize {
        self.max_pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum ProviderError {
    #[error(transparent)]
    Remote(#[from] RemoteError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("provider produced an invalid message: {0}")]
    InvalidOutput(String),
}

/// Decides which messages an agent emits next.
///
/// `state` already contains the entry for the tick that just elapsed, so
/// emitted messages must carry `state.tick()` and `state.id` as sender.
/// `seed` is derived from the world seed, the agent and the tick; providers
/// that need randomness draw from it and nothing else.
pub trait BehaviorProvider: Send + Sync {
    fn act(&self, state: &AgentState, feed: &[Message], seed: u64) -> Result<Vec<Message>, ProviderError>;
}
