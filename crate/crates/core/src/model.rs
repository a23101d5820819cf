//! Messages, agent states and the discrete-time world loop.
//!
//! Time is a shared global clock. At tick `t` every agent
//!
//! 1. receives the messages produced at `t` that are addressed to it
//!    (directly or by broadcast), filtered through the feed mechanics,
//! 2. appends what it sent at `t` and its curated feed to its history, and
//! 3. asks its behavior provider for the messages it emits at `t + 1`.
//!
//! [`step`] never mutates its input: a failed step leaves the caller's world
//! untouched.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{BehaviorProvider, Persona, ProviderError};
use crate::mechanics::{apply_mechanics, MechanicsConfig};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(String);

impl AgentId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for AgentId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MessageId(String);

impl MessageId {
    pub fn new(id: impl Into<String>) -> Self {
        Self(id.into())
    }

    /// Canonical id for the `seq`-th message an agent emits at `tick`.
    pub fn emitted(sender: &AgentId, tick: u64, seq: usize) -> Self {
        Self(format!("{sender}@{tick}#{seq}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MessageId {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// Addressee of a message. On the wire a broadcast is `null`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Option<AgentId>", into = "Option<AgentId>")]
pub enum Recipient {
    Agent(AgentId),
    Broadcast,
}

impl From<Option<AgentId>> for Recipient {
    fn from(value: Option<AgentId>) -> Self {
        value.map_or(Recipient::Broadcast, Recipient::Agent)
    }
}

impl From<Recipient> for Option<AgentId> {
    fn from(value: Recipient) -> Self {
        match value {
            Recipient::Agent(id) => Some(id),
            Recipient::Broadcast => None,
        }
    }
}

impl Recipient {
    pub fn reaches(&self, agent: &AgentId) -> bool {
        match self {
            Recipient::Agent(id) => id == agent,
            Recipient::Broadcast => true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MessageKind {
    Post,
    Reply,
}

/// One directed unit of communication. Field order is the JSON Lines order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: MessageId,
    pub sender: AgentId,
    pub recipient: Recipient,
    pub tick: u64,
    pub kind: MessageKind,
    pub reply_to: Option<MessageId>,
    pub text: String,
    pub topic: Option<String>,
}

impl Message {
    pub fn post(
        id: MessageId,
        sender: AgentId,
        recipient: Recipient,
        tick: u64,
        text: impl Into<String>,
    ) -> Result<Self, ModelError> {
        let msg = Self {
            id,
            sender,
            recipient,
            tick,
            kind: MessageKind::Post,
            reply_to: None,
            text: text.into(),
            topic: None,
        };
        msg.validate()?;
        Ok(msg)
    }

    /// A reply addressed to the sender of `parent`, inheriting its topic.
    pub fn reply(
        id: MessageId,
        sender: AgentId,
        parent: &Message,
        tick: u64,
        text: impl Into<String>,
    ) -> Result<Self, ModelError> {
        if tick < parent.tick {
            return Err(ModelError::InvalidMessage {
                id,
                reason: format!("reply at tick {tick} precedes its parent at tick {}", parent.tick),
            });
        }
        let msg = Self {
            id,
            sender,
            recipient: Recipient::Agent(parent.sender.clone()),
            tick,
            kind: MessageKind::Reply,
            reply_to: Some(parent.id.clone()),
            text: text.into(),
            topic: parent.topic.clone(),
        };
        msg.validate()?;
        Ok(msg)
    }

    pub fn with_topic(mut self, topic: impl Into<String>) -> Self {
        self.topic = Some(topic.into());
        self
    }

    /// Checks the invariants that hold for a message in isolation.
    pub fn validate(&self) -> Result<(), ModelError> {
        let reason = match (self.kind, &self.reply_to) {
            (MessageKind::Reply, None) => Some("reply without reply_to"),
            (MessageKind::Post, Some(_)) => Some("post carries reply_to"),
            _ if self.text.trim().is_empty() => Some("empty text"),
            _ => None,
        };
        match reason {
            Some(reason) => Err(ModelError::InvalidMessage {
                id: self.id.clone(),
                reason: reason.to_owned(),
            }),
            None => Ok(()),
        }
    }
}

/// What an agent sent and perceived during one tick.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub sent: Vec<Message>,
    pub received_curated: Vec<Message>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    pub persona: Option<Persona>,
    pub history: Vec<HistoryEntry>,
}

impl AgentState {
    pub fn new(id: AgentId) -> Self {
        Self {
            id,
            persona: None,
            history: Vec::new(),
        }
    }

    pub fn with_persona(mut self, persona: Persona) -> Self {
        self.persona = Some(persona);
        self
    }

    /// Number of ticks this agent has lived through.
    pub fn tick(&self) -> u64 {
        self.history.len() as u64
    }

    /// Looks up a message this agent sent or received.
    pub fn find_message(&self, id: &MessageId) -> Option<&Message> {
        self.history
            .iter()
            .rev()
            .flat_map(|e| e.received_curated.iter().chain(e.sent.iter()))
            .find(|m| &m.id == id)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("agent {agent} is at tick {expected} but message {id} carries tick {found}")]
    TickMismatch {
        agent: AgentId,
        id: MessageId,
        expected: u64,
        found: u64,
    },
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("duplicate agent {0}")]
    DuplicateAgent(AgentId),
    #[error("no behavior provider registered for agent {0}")]
    MissingProvider(AgentId),
    #[error("provider for agent {agent} failed: {source}")]
    Provider {
        agent: AgentId,
        #[source]
        source: ProviderError,
    },
    #[error("agent {agent} broke the provider contract: {reason}")]
    ContractViolation { agent: AgentId, reason: String },
    #[error("invalid message {id}: {reason}")]
    InvalidMessage { id: MessageId, reason: String },
    #[error("message id {0} produced twice in one tick")]
    DuplicateMessageId(MessageId),
    #[error("n_ticks must be at least 1")]
    NoTicks,
    #[error("simulation failed at tick {tick}: {source}")]
    AtTick {
        tick: u64,
        #[source]
        source: Box<ModelError>,
    },
    #[error("transcript line {line}: {source}")]
    TranscriptFormat {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Appends one history entry holding `sent` and `received`.
///
/// Every message must carry the agent's current tick; senders and
/// recipients must match the agent.
pub fn update_agent(
    mut state: AgentState,
    sent: Vec<Message>,
    received: Vec<Message>,
) -> Result<AgentState, ModelError> {
    let now = state.tick();
    for msg in sent.iter().chain(received.iter()) {
        if msg.tick != now {
            return Err(ModelError::TickMismatch {
                agent: state.id.clone(),
                id: msg.id.clone(),
                expected: now,
                found: msg.tick,
            });
        }
    }
    if let Some(m) = sent.iter().find(|m| m.sender != state.id) {
        return Err(ModelError::ContractViolation {
            agent: state.id.clone(),
            reason: format!("sent message {} has sender {}", m.id, m.sender),
        });
    }
    if let Some(m) = received.iter().find(|m| !m.recipient.reaches(&state.id)) {
        return Err(ModelError::ContractViolation {
            agent: state.id.clone(),
            reason: format!("received message {} is not addressed to this agent", m.id),
        });
    }
    state.history.push(HistoryEntry {
        sent,
        received_curated: received,
    });
    Ok(state)
}

pub type Behaviors = BTreeMap<AgentId, Arc<dyn BehaviorProvider>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct World {
    pub tick: u64,
    pub agents: BTreeMap<AgentId, AgentState>,
    pub undelivered: Vec<Message>,
    pub rng_seed: u64,
}

impl World {
    pub fn new(agents: impl IntoIterator<Item = AgentState>, rng_seed: u64) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for agent in agents {
            if agent.tick() != 0 {
                return Err(ModelError::ContractViolation {
                    agent: agent.id.clone(),
                    reason: "initial agent state must have empty history".into(),
                });
            }
            if let Some(prev) = map.insert(agent.id.clone(), agent) {
                return Err(ModelError::DuplicateAgent(prev.id));
            }
        }
        Ok(Self {
            tick: 0,
            agents: map,
            undelivered: Vec::new(),
            rng_seed,
        })
    }

    /// Queues messages produced at the current tick, e.g. opening posts.
    pub fn inject(&mut self, messages: impl IntoIterator<Item = Message>) -> Result<(), ModelError> {
        let mut seen: HashSet<MessageId> = self.undelivered.iter().map(|m| m.id.clone()).collect();
        let mut staged = Vec::new();
        for msg in messages {
            self.check_emitted(&msg.sender, &msg, self.tick)?;
            if !seen.insert(msg.id.clone()) {
                return Err(ModelError::DuplicateMessageId(msg.id));
            }
            staged.push(msg);
        }
        self.undelivered.extend(staged);
        Ok(())
    }

    fn check_emitted(&self, agent: &AgentId, msg: &Message, tick: u64) -> Result<(), ModelError> {
        msg.validate()?;
        let violation = |reason: String| ModelError::ContractViolation {
            agent: agent.clone(),
            reason,
        };
        if &msg.sender != agent {
            return Err(violation(format!("message {} claims sender {}", msg.id, msg.sender)));
        }
        if !self.agents.contains_key(agent) {
            return Err(ModelError::UnknownAgent(agent.clone()));
        }
        if msg.tick != tick {
            return Err(violation(format!(
                "message {} carries tick {} instead of {tick}",
                msg.id, msg.tick
            )));
        }
        if let Recipient::Agent(to) = &msg.recipient {
            if to == agent {
                return Err(violation(format!("message {} is addressed to its sender", msg.id)));
            }
            if !self.agents.contains_key(to) {
                return Err(violation(format!(
                    "message {} is addressed to unknown agent {to}",
                    msg.id
                )));
            }
        }
        Ok(())
    }
}

/// Raw inbox of `agent`: every in-flight message that reaches it, minus its own,
/// in production order.
pub fn route_inbox(world: &World, agent: &AgentId) -> Result<Vec<Message>, ModelError> {
    if !world.agents.contains_key(agent) {
        return Err(ModelError::UnknownAgent(agent.clone()));
    }
    Ok(world
        .undelivered
        .iter()
        .filter(|m| &m.sender != agent && m.recipient.reaches(agent))
        .cloned()
        .collect())
}

/// Advances the world by one tick.
///
/// Per-agent work runs in parallel; results are merged in agent-id order, and
/// the first failing agent in that order determines the returned error.
pub fn step(world: &World, mechanics: &MechanicsConfig, behaviors: &Behaviors) -> Result<World, ModelError> {
    if let Some(missing) = world.agents.keys().find(|id| !behaviors.contains_key(*id)) {
        return Err(ModelError::MissingProvider(missing.clone()));
    }
    let next_tick = world.tick + 1;

    let outcomes: Vec<Result<(AgentState, Vec<Message>), ModelError>> = world
        .agents
        .par_iter()
        .map(|(id, state)| {
            let inbox = route_inbox(world, id)?;
            let feed = apply_mechanics(mechanics, id, &inbox);
            let sent: Vec<Message> = world.undelivered.iter().filter(|m| &m.sender == id).cloned().collect();
            let updated = update_agent(state.clone(), sent, feed.clone())?;

            let agent_seed = seed::derive(world.rng_seed, &[seed::digest_str(id.as_str()), next_tick]);
            let emitted = behaviors[id]
                .act(&updated, &feed, agent_seed)
                .map_err(|source| ModelError::Provider {
                    agent: id.clone(),
                    source,
                })?;
            for msg in &emitted {
                world.check_emitted(id, msg, next_tick)?;
                if let Some(parent) = &msg.reply_to {
                    if updated.find_message(parent).is_none() {
                        return Err(ModelError::ContractViolation {
                            agent: id.clone(),
                            reason: format!("message {} replies to {parent}, which the agent never saw", msg.id),
                        });
                    }
                }
            }
            Ok((updated, emitted))
        })
        .collect();

    let mut agents = BTreeMap::new();
    let mut undelivered = Vec::new();
    let mut seen = HashSet::new();
    for outcome in outcomes {
        let (state, emitted) = outcome?;
        for msg in &emitted {
            if !seen.insert(msg.id.clone()) {
                return Err(ModelError::DuplicateMessageId(msg.id.clone()));
            }
        }
        undelivered.extend(emitted);
        agents.insert(state.id.clone(), state);
    }

    Ok(World {
        tick: next_tick,
        agents,
        undelivered,
        rng_seed: world.rng_seed,
    })
}

/// Every message produced during a run, ordered by (tick, production order).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Transcript(pub Vec<Message>);

impl Transcript {
    pub fn messages(&self) -> &[Message] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), ModelError> {
        for msg in &self.0 {
            serde_json::to_writer(&mut out, msg).map_err(std::io::Error::from)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, ModelError> {
        let mut messages = Vec::new();
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let msg: Message =
                serde_json::from_str(&line).map_err(|source| ModelError::TranscriptFormat { line: idx + 1, source })?;
            msg.validate()?;
            messages.push(msg);
        }
        Ok(Self(messages))
    }
}

#[derive(Clone, Debug)]
pub struct SimulationRun {
    pub world: World,
    pub transcript: Transcript,
}

/// Applies [`step`] `n_ticks` times, collecting everything produced along the way.
///
/// Messages already queued in `world` (opening posts) are not part of the transcript.
pub fn run_simulation(
    world: &World,
    mechanics: &MechanicsConfig,
    behaviors: &Behaviors,
    n_ticks: u64,
) -> Result<SimulationRun, ModelError> {
    if n_ticks == 0 {
        return Err(ModelError::NoTicks);
    }
    let mut current = world.clone();
    let mut produced = Vec::new();
    for _ in 0..n_ticks {
        current = step(&current, mechanics, behaviors).map_err(|e| ModelError::AtTick {
            tick: current.tick,
            source: Box::new(e),
        })?;
        produced.extend(current.undelivered.iter().cloned());
    }
    Ok(SimulationRun {
        world: current,
        transcript: Transcript(produced),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::provider::{StubMode, StubProvider};

    fn id(s: &str) -> AgentId {
        AgentId::new(s)
    }

    fn post(msg_id: &str, from: &str, to: Option<&str>, tick: u64) -> Message {
        let recipient = to.map_or(Recipient::Broadcast, |t| Recipient::Agent(id(t)));
        Message::post(
            MessageId::new(msg_id),
            id(from),
            recipient,
            tick,
            format!("text of {msg_id}"),
        )
        .unwrap()
    }

    fn world(names: &[&str]) -> World {
        World::new(names.iter().map(|n| AgentState::new(id(n))), 7).unwrap()
    }

    fn behaviors(names: &[&str], mode: StubMode) -> Behaviors {
        names
            .iter()
            .map(|n| (id(n), Arc::new(StubProvider::new(mode)) as Arc<dyn BehaviorProvider>))
            .collect()
    }

    #[test]
    fn message_invariants() {
        let p = post("p", "A", None, 0);
        let r = Message::reply("r".into(), id("B"), &p, 1, "hi").unwrap();
        assert_eq!(r.recipient, Recipient::Agent(id("A")));
        assert_eq!(r.reply_to, Some(p.id.clone()));
        assert!(Message::reply("r".into(), id("B"), &post("q", "A", None, 3), 2, "hi").is_err());
        assert!(Message::post("e".into(), id("A"), Recipient::Broadcast, 0, "  ").is_err());
        let mut bad = r.clone();
        bad.reply_to = None;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn update_agent_on_empty_history() {
        let s = update_agent(AgentState::new(id("A")), vec![], vec![]).unwrap();
        assert_eq!(s.history, vec![HistoryEntry::default()]);
    }

    #[test]
    fn update_agent_appends_without_touching_prior_entries() {
        let mut s = AgentState::new(id("A"));
        for _ in 0..3 {
            s = update_agent(s, vec![], vec![]).unwrap();
        }
        let before = s.history.clone();
        let sent = vec![post("a", "A", None, 3)];
        let received = vec![post("b", "B", Some("A"), 3), post("c", "C", None, 3)];
        let s = update_agent(s, sent.clone(), received.clone()).unwrap();
        assert_eq!(s.history.len(), 4);
        assert_eq!(&s.history[..3], &before[..]);
        assert_eq!(s.history[3].sent, sent);
        assert_eq!(s.history[3].received_curated, received);
    }

    #[test]
    fn update_agent_rejects_stale_ticks() {
        let mut s = AgentState::new(id("A"));
        for _ in 0..7 {
            s = update_agent(s, vec![], vec![]).unwrap();
        }
        let err = update_agent(s, vec![], vec![post("x", "B", Some("A"), 5)]).unwrap_err();
        assert!(matches!(
            err,
            ModelError::TickMismatch {
                expected: 7,
                found: 5,
                ..
            }
        ));
    }

    #[test]
    fn update_agent_rejects_foreign_messages() {
        let s = AgentState::new(id("A"));
        assert!(update_agent(s.clone(), vec![post("x", "B", None, 0)], vec![]).is_err());
        assert!(update_agent(s, vec![], vec![post("x", "B", Some("C"), 0)]).is_err());
    }

    #[test]
    fn route_inbox_delivers_direct_and_broadcast() {
        let mut w = world(&["A", "B", "C"]);
        let ab = post("1", "A", Some("B"), 0);
        let cb = post("2", "C", None, 0);
        w.inject([ab.clone(), cb.clone()]).unwrap();
        assert_eq!(route_inbox(&w, &id("B")).unwrap(), vec![ab, cb]);
    }

    #[test]
    fn route_inbox_empty_and_self_exclusion() {
        let mut w = world(&["A", "B"]);
        assert!(route_inbox(&w, &id("B")).unwrap().is_empty());
        w.inject([post("1", "A", None, 0)]).unwrap();
        assert!(route_inbox(&w, &id("A")).unwrap().is_empty());
        assert!(matches!(route_inbox(&w, &id("Z")), Err(ModelError::UnknownAgent(_))));
    }

    #[test]
    fn inject_validates_addressing() {
        let mut w = world(&["A", "B"]);
        assert!(w.inject([post("1", "A", Some("A"), 0)]).is_err());
        assert!(w.inject([post("1", "A", Some("Z"), 0)]).is_err());
        assert!(w.inject([post("1", "A", None, 1)]).is_err());
        assert!(w.inject([post("1", "A", None, 0), post("1", "B", None, 0)]).is_err());
        assert!(w.undelivered.is_empty());
    }

    #[test]
    fn broadcast_then_single_reply() {
        let mut w = world(&["A", "B"]);
        let opening = post("open", "A", None, 0);
        w.inject([opening.clone()]).unwrap();
        let next = step(
            &w,
            &MechanicsConfig::identity(),
            &behaviors(&["A", "B"], StubMode::ReplyToEach),
        )
        .unwrap();
        assert_eq!(next.tick, 1);
        let b = &next.agents[&id("B")];
        assert_eq!(b.history[0].received_curated, vec![opening.clone()]);
        assert_eq!(next.agents[&id("A")].history[0].sent, vec![opening.clone()]);
        assert_eq!(next.undelivered.len(), 1);
        let reply = &next.undelivered[0];
        assert_eq!(reply.sender, id("B"));
        assert_eq!(reply.kind, MessageKind::Reply);
        assert_eq!(reply.reply_to, Some(opening.id));
        assert_eq!(reply.tick, 1);
    }

    #[test]
    fn quiescent_step_only_advances_tick() {
        let w = world(&["A", "B"]);
        let next = step(
            &w,
            &MechanicsConfig::identity(),
            &behaviors(&["A", "B"], StubMode::ReplyToEach),
        )
        .unwrap();
        assert_eq!(next.tick, w.tick + 1);
        assert!(next.undelivered.is_empty());
        assert!(next.agents.values().all(|a| a.history == vec![HistoryEntry::default()]));
    }

    #[test]
    fn missing_provider_is_rejected() {
        let w = world(&["A", "B"]);
        let err = step(&w, &MechanicsConfig::identity(), &behaviors(&["A"], StubMode::Silent)).unwrap_err();
        assert!(matches!(err, ModelError::MissingProvider(a) if a == id("B")));
    }

    #[test]
    fn ping_pong_alternates() {
        let mut w = world(&["A", "B"]);
        w.inject([post("open", "A", Some("B"), 0)]).unwrap();
        let run = run_simulation(
            &w,
            &MechanicsConfig::identity(),
            &behaviors(&["A", "B"], StubMode::ReplyToEach),
            4,
        )
        .unwrap();
        let senders: Vec<&str> = run.transcript.messages().iter().map(|m| m.sender.as_str()).collect();
        assert_eq!(senders, ["B", "A", "B", "A"]);
        let ticks: Vec<u64> = run.transcript.messages().iter().map(|m| m.tick).collect();
        assert_eq!(ticks, [1, 2, 3, 4]);
        assert_eq!(run.world.tick, 4);
    }

    #[test]
    fn one_tick_run_equals_step() {
        let mut w = world(&["A", "B", "C"]);
        w.inject([post("open", "A", None, 0)]).unwrap();
        let b = behaviors(&["A", "B", "C"], StubMode::ReplyToEach);
        let stepped = step(&w, &MechanicsConfig::identity(), &b).unwrap();
        let run = run_simulation(&w, &MechanicsConfig::identity(), &b, 1).unwrap();
        assert_eq!(run.world, stepped);
        assert_eq!(run.transcript.0, stepped.undelivered);
    }

    #[test]
    fn zero_ticks_is_an_error() {
        let w = world(&["A"]);
        assert!(matches!(
            run_simulation(
                &w,
                &MechanicsConfig::identity(),
                &behaviors(&["A"], StubMode::Silent),
                0
            ),
            Err(ModelError::NoTicks)
        ));
    }

    #[test]
    fn quiescent_run_is_empty() {
        let w = world(&["A", "B"]);
        let run = run_simulation(
            &w,
            &MechanicsConfig::identity(),
            &behaviors(&["A", "B"], StubMode::ReplyToEach),
            10,
        )
        .unwrap();
        assert!(run.transcript.is_empty());
        assert_eq!(run.world.tick, 10);
    }

    #[test]
    fn transcript_jsonl_field_names() {
        let t = Transcript(vec![post("1", "A", None, 0)]);
        let line = t.to_jsonl();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
        let mut expected = vec!["id", "sender", "recipient", "tick", "kind", "reply_to", "text", "topic"];
        expected.sort_unstable();
        let mut keys = keys;
        keys.sort_unstable();
        assert_eq!(keys, expected);
        assert_eq!(v["recipient"], serde_json::Value::Null);
        assert_eq!(v["kind"], "post");
        assert_eq!(Transcript::read_jsonl(line.as_bytes()).unwrap(), t);
    }
}
