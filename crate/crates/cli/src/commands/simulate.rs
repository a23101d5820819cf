use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::evaluate::realism_report;
use super::{markov_model, prepare_output, remote_generator, reply_histories, templates};
use crate::config::{LoadedConfig, ProviderKind};
use crate::error::CliError;
use crate::io;
use twon_core::behavior::{MarkovProvider, RemoteProvider, StubProvider};
use twon_core::ingest::SampleKind;
use twon_core::mechanics::{mean_loss, FeedObservation};
use twon_core::metrics::{discourse_metric_q, LexiconQ, MetricReport, QPlugin, Task};
use twon_core::model::{run_simulation, Behaviors};
use twon_core::{AgentId, AgentState, BehaviorProvider, MechanicsConfig, Message, MessageId, Recipient, World};

pub const BUNDLE_SCHEMA_VERSION: u32 = 1;
pub const BUNDLE_SCHEMA: &str = include_str!("../../schemas/simulate_bundle.schema.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QValue {
    pub plugin: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechanicsLoss {
    pub value: f64,
    pub alpha: f64,
    pub observations: usize,
    pub mechanics: MechanicsConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRef {
    /// Relative to the bundle's directory.
    pub path: String,
    pub messages: usize,
    pub sha256: String,
}

/// The only output of a simulation: `q` cannot be written without the
/// behavior-realism report and the mechanics loss it must be read against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationBundle {
    pub schema_version: u32,
    pub seed: u64,
    pub ticks: u64,
    pub agents: Vec<String>,
    pub q: QValue,
    pub behavior_realism: MetricReport,
    pub mechanics_loss: MechanicsLoss,
    pub transcript: TranscriptRef,
}

fn behaviors(cfg: &LoadedConfig, agents: &[AgentId]) -> Result<Behaviors, CliError> {
    let p = &cfg.config.provider;
    let train = cfg
        .optional("train", &cfg.config.data.train)?
        .map(|path| io::read_corpus(&path))
        .transpose()?;
    let shared: Arc<dyn BehaviorProvider> = match p.kind {
        ProviderKind::Stub => Arc::new(StubProvider::new(p.stub_mode.into())),
        ProviderKind::Markov => {
            let train = train
                .as_ref()
                .ok_or_else(|| CliError::Config("data.train is required for the markov provider".into()))?;
            let mut provider = MarkovProvider::new(markov_model(cfg, train, SampleKind::Reply)?);
            provider.max_tokens = p.max_tokens as usize;
            provider.max_replies = p.max_replies;
            provider.reply_probability = p.reply_probability;
            Arc::new(provider)
        }
        ProviderKind::Remote => {
            let mut provider = RemoteProvider::new(remote_generator(cfg)?, templates(cfg)?, p.max_pairs);
            provider.max_replies = p.max_replies;
            for (user, history) in reply_histories(cfg, train.as_ref())? {
                provider = provider.with_history(AgentId::new(user), history);
            }
            Arc::new(provider)
        }
    };
    Ok(agents.iter().map(|a| (a.clone(), Arc::clone(&shared))).collect())
}

fn opening_world(cfg: &LoadedConfig, agents: &[AgentId]) -> Result<World, CliError> {
    let mut world = World::new(agents.iter().cloned().map(AgentState::new), cfg.config.seed)?;
    let known: BTreeSet<&AgentId> = agents.iter().collect();
    let mut openings = Vec::new();
    for (i, o) in cfg.config.simulate.openings.iter().enumerate() {
        let sender = AgentId::new(&o.agent);
        if !known.contains(&sender) {
            return Err(CliError::Config(format!(
                "simulate.openings[{i}]: unknown agent {}",
                o.agent
            )));
        }
        let recipient =
            o.to.as_ref()
                .map_or(Recipient::Broadcast, |to| Recipient::Agent(AgentId::new(to)));
        let mut msg = Message::post(MessageId::new(format!("open{i}")), sender, recipient, 0, o.text.clone())
            .map_err(|e| CliError::Config(format!("simulate.openings[{i}]: {e}")))?;
        if let Some(topic) = &o.topic {
            msg = msg.with_topic(topic.clone());
        }
        openings.push(msg);
    }
    world
        .inject(openings)
        .map_err(|e| CliError::Config(format!("simulate.openings: {e}")))?;
    Ok(world)
}

/// Runs the configured scenario and writes the transcript and the bundle.
pub fn cmd_simulate(cfg: &LoadedConfig, overrides: &BTreeMap<String, String>) -> Result<SimulationBundle, CliError> {
    cfg.validate()?;
    let sim = &cfg.config.simulate;
    let data = &cfg.config.data;
    if sim.agents.is_empty() {
        return Err(CliError::Config("simulate.agents must name at least one agent".into()));
    }
    if sim.ticks == 0 {
        return Err(CliError::Config("simulate.ticks must be positive".into()));
    }
    if !(0.0..=1.0).contains(&sim.alpha) {
        return Err(CliError::Config("simulate.alpha must be in [0, 1]".into()));
    }
    // Everything the bundle needs is checked before anything runs.
    let lexicon_path = cfg.required("lexicon", &data.lexicon)?;
    let observations_path = cfg.required("observations", &data.observations)?;
    let stored_report = cfg.optional("realism_report", &data.realism_report)?;
    if stored_report.is_none() && data.generated.is_none() {
        cfg.required("test", &data.test).map_err(|_| {
            CliError::Config(
                "simulate needs data.realism_report, data.generated or data.test for the realism report".into(),
            )
        })?;
    }
    let lexicon = LexiconQ::from_file(&lexicon_path).map_err(|e| CliError::Config(e.to_string()))?;
    let observations: Vec<FeedObservation> = io::read_jsonl(&observations_path)?;

    let agents: Vec<AgentId> = sim.agents.iter().map(AgentId::new).collect();
    let world = opening_world(cfg, &agents)?;
    let behaviors = behaviors(cfg, &agents)?;

    let behavior_realism = match stored_report {
        Some(path) => io::read_json::<MetricReport>(&path)?,
        None => realism_report(cfg, Task::Reply)?.0,
    };
    let lr = mean_loss(&cfg.config.mechanics, &observations, sim.alpha)?;

    let run = run_simulation(&world, &cfg.config.mechanics, &behaviors, sim.ticks)?;
    let q = discourse_metric_q(&run.transcript, &lexicon)?;

    let dir = prepare_output(cfg, overrides)?;
    let transcript_text = run.transcript.to_jsonl();
    let transcript_name = "transcript.jsonl";
    io::write_text(&dir.join(transcript_name), &transcript_text)?;

    let bundle = SimulationBundle {
        schema_version: BUNDLE_SCHEMA_VERSION,
        seed: cfg.config.seed,
        ticks: sim.ticks,
        agents: sim.agents.clone(),
        q: QValue {
            plugin: lexicon.name().to_owned(),
            source: lexicon_path.file_name().map(|n| n.to_string_lossy().into_owned()),
            value: q,
        },
        behavior_realism,
        mechanics_loss: MechanicsLoss {
            value: lr,
            alpha: sim.alpha,
            observations: observations.len(),
            mechanics: cfg.config.mechanics.clone(),
        },
        transcript: TranscriptRef {
            path: transcript_name.into(),
            messages: run.transcript.len(),
            sha256: format!("{:x}", Sha256::digest(transcript_text.as_bytes())),
        },
    };
    io::write_json(&bundle_path(&dir), &bundle)?;
    Ok(bundle)
}

pub fn bundle_path(dir: &std::path::Path) -> PathBuf {
    dir.join("bundle.json")
}
