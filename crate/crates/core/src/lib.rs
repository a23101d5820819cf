//! Simulation engine and realism metrics for twins of online social networks.
//!
//! The crate is organised around the discrete-time agent loop:
//!
//! * [`model`] holds messages, agent states and the world, and advances it tick by tick.
//! * [`mechanics`] turns an agent's raw inbox into the curated feed it perceives and
//!   measures how far a predicted feed is from an observed one.
//! * [`behavior`] builds prompts and hosts the providers that decide what an agent sends.
//! * [`likelihood`] is the dual-branch reply-likelihood scorer, trained with AdamW.
//! * [`metrics`] scores imitated text against originals and evaluates generated discourse.
//! * [`ingest`] loads and filters raw samples and builds training/evaluation sets.
//! * [`sidecar`] is the wire schema and client for the optional inference service.

pub mod behavior;
pub mod ingest;
pub mod likelihood;
pub mod mechanics;
pub mod metrics;
pub mod model;
pub mod seed;
pub mod sidecar;
pub mod text;

pub use behavior::{BehaviorProvider, Language, Persona, Prompt, ProviderError, ReplyHistory};
pub use likelihood::{EmbeddingVector, LikelihoodExample, ScorerParams};
pub use mechanics::{MechanicsConfig, MechanicsVariant};
pub use metrics::MetricReport;
pub use model::{AgentId, AgentState, Message, MessageId, MessageKind, Recipient, Transcript, World};
