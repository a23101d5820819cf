//! Built-in behavior providers. All of them only reply; none emits a post.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;

use super::{BehaviorProvider, MarkovModel, ProviderError, RemoteGenerator, ReplyHistory, TemplateSet};
use crate::model::{AgentId, AgentState, Message, MessageId, MessageKind};
use crate::seed;

fn reply(state: &AgentState, seq: usize, parent: &Message, text: String) -> Result<Message, ProviderError> {
    let tick = state.tick();
    Message::reply(
        MessageId::emitted(&state.id, tick, seq),
        state.id.clone(),
        parent,
        tick,
        text,
    )
    .map_err(|e| ProviderError::InvalidOutput(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StubMode {
    /// Never sends anything.
    Silent,
    /// Replies once to every message in the feed with `re: <text>`.
    ReplyToEach,
    /// Replies once to every message in the feed with its exact text.
    Echo,
}

#[derive(Clone, Debug)]
pub struct StubProvider {
    mode: StubMode,
}

impl StubProvider {
    pub fn new(mode: StubMode) -> Self {
        Self { mode }
    }
}

impl BehaviorProvider for StubProvider {
    fn act(&self, state: &AgentState, feed: &[Message], _seed: u64) -> Result<Vec<Message>, ProviderError> {
        let text = |m: &Message| match self.mode {
            StubMode::Echo => m.text.clone(),
            _ => format!("re: {}", m.text),
        };
        match self.mode {
            StubMode::Silent => Ok(Vec::new()),
            StubMode::ReplyToEach | StubMode::Echo => feed
                .iter()
                .enumerate()
                .map(|(i, m)| reply(state, i, m, text(m)))
                .collect(),
        }
    }
}

/// Replies with Markov-generated text.
#[derive(Clone, Debug)]
pub struct MarkovProvider {
    model: Arc<MarkovModel>,
    pub max_tokens: usize,
    /// Replies at most to the first `max_replies` feed messages.
    pub max_replies: usize,
    pub reply_probability: f64,
}

impl MarkovProvider {
    pub fn new(model: Arc<MarkovModel>) -> Self {
        Self {
            model,
            max_tokens: 40,
            max_replies: usize::MAX,
            reply_probability: 1.0,
        }
    }
}

impl BehaviorProvider for MarkovProvider {
    fn act(&self, state: &AgentState, feed: &[Message], seed: u64) -> Result<Vec<Message>, ProviderError> {
        let mut rng = seed::rng(seed);
        let mut out = Vec::new();
        for (i, parent) in feed.iter().take(self.max_replies).enumerate() {
            if !rng.gen_bool(self.reply_probability.clamp(0.0, 1.0)) {
                continue;
            }
            let text = self.model.generate(seed::derive(seed, &[i as u64]), self.max_tokens);
            if text.is_empty() {
                continue;
            }
            out.push(reply(state, out.len(), parent, text)?);
        }
        Ok(out)
    }
}

/// Replies through a remote generator, prompting with the agent's few-shot history.
///
/// The prompt history starts from the pairs registered for the agent and is
/// extended with every reply the agent has sent during the simulation.
#[derive(Debug)]
pub struct RemoteProvider {
    generator: Arc<RemoteGenerator>,
    templates: TemplateSet,
    histories: BTreeMap<AgentId, ReplyHistory>,
    pub max_pairs: usize,
    pub max_replies: usize,
}

impl RemoteProvider {
    pub fn new(generator: Arc<RemoteGenerator>, templates: TemplateSet, max_pairs: usize) -> Self {
        Self {
            generator,
            templates,
            histories: BTreeMap::new(),
            max_pairs,
            max_replies: usize::MAX,
        }
    }

    pub fn with_history(mut self, agent: AgentId, history: ReplyHistory) -> Self {
        self.histories.insert(agent, history);
        self
    }

    fn history_for(&self, state: &AgentState) -> Result<ReplyHistory, ProviderError> {
        let mut history = match self.histories.get(&state.id) {
            Some(h) => h.clone(),
            None => ReplyHistory::new(self.max_pairs)?,
        };
        for entry in &state.history {
            for sent in entry.sent.iter().filter(|m| m.kind == MessageKind::Reply) {
                if let Some(parent) = sent.reply_to.as_ref().and_then(|p| state.find_message(p)) {
                    history.push(parent.text.clone(), sent.text.clone())?;
                }
            }
        }
        Ok(history)
    }
}

impl BehaviorProvider for RemoteProvider {
    fn act(&self, state: &AgentState, feed: &[Message], _seed: u64) -> Result<Vec<Message>, ProviderError> {
        let history = self.history_for(state)?;
        let mut out = Vec::new();
        for parent in feed.iter().take(self.max_replies) {
            let prompt = self.templates.reply_prompt(&history, parent)?;
            let text = self.generator.generate(&prompt)?;
            out.push(reply(state, out.len(), parent, text)?);
        }
        Ok(out)
    }
}
