mod evaluate;
mod fit;
mod ingest;
mod simulate;
mod train_scorer;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

pub use evaluate::{cmd_evaluate, evaluate_pairs, EvaluateOutput};
pub use fit::cmd_fit_mechanics;
pub use ingest::cmd_ingest;
pub use simulate::{cmd_simulate, SimulationBundle, BUNDLE_SCHEMA, BUNDLE_SCHEMA_VERSION};
pub use train_scorer::{cmd_train_scorer, TrainSummary};

use crate::config::{LoadedConfig, ProviderKind};
use crate::error::CliError;
use crate::io;
use twon_core::behavior::{MarkovModel, RemoteGenerator, ReplyHistory, TemplateSet};
use twon_core::ingest::{
    build_reply_pairs, Corpus, EmbeddingSource, FixtureEmbeddings, HashingEmbedder, RemoteEmbedder, SampleKind,
};
use twon_core::sidecar::SidecarClient;

pub(crate) fn sidecar_client(cfg: &LoadedConfig) -> Result<SidecarClient, CliError> {
    let p = &cfg.config.provider;
    Ok(SidecarClient::new(
        cfg.sidecar_url()?,
        Duration::from_millis(p.timeout_ms),
        p.retry,
        p.max_in_flight,
    ))
}

/// Fixture file when configured, the sidecar for remote setups, and the
/// hashing embedder otherwise.
pub(crate) fn embedder(cfg: &LoadedConfig) -> Result<Box<dyn EmbeddingSource>, CliError> {
    if let Some(path) = cfg.optional("embeddings", &cfg.config.data.embeddings)? {
        let fixture = FixtureEmbeddings::read_jsonl(io::open(&path)?)?;
        return Ok(Box::new(fixture));
    }
    if cfg.config.provider.kind == ProviderKind::Remote {
        return Ok(Box::new(RemoteEmbedder::connect(sidecar_client(cfg)?)?));
    }
    Ok(Box::new(HashingEmbedder::new(cfg.config.metrics.embedding_dim)))
}

pub(crate) fn templates(cfg: &LoadedConfig) -> Result<TemplateSet, CliError> {
    match cfg.optional("templates", &cfg.config.data.templates)? {
        Some(dir) => {
            TemplateSet::load(&dir, &cfg.config.provider.template_version).map_err(|e| CliError::Config(e.to_string()))
        }
        None => Ok(TemplateSet::builtin()),
    }
}

pub(crate) fn remote_generator(cfg: &LoadedConfig) -> Result<Arc<RemoteGenerator>, CliError> {
    let mut generator = RemoteGenerator::new(sidecar_client(cfg)?);
    generator.max_tokens = cfg.config.provider.max_tokens;
    generator.temperature = cfg.config.provider.temperature;
    Ok(Arc::new(generator))
}

/// Markov model over the train split's texts of one kind in the configured language.
pub(crate) fn markov_model(cfg: &LoadedConfig, train: &Corpus, kind: SampleKind) -> Result<Arc<MarkovModel>, CliError> {
    let texts: Vec<&str> = train
        .samples
        .iter()
        .filter(|s| s.kind == kind && s.language == cfg.config.language)
        .map(|s| s.text.as_str())
        .collect();
    MarkovModel::train(&texts, cfg.config.provider.markov_order)
        .map(Arc::new)
        .map_err(|e| CliError::Data(format!("markov training: {e}")))
}

pub(crate) fn reply_histories(
    cfg: &LoadedConfig,
    train: Option<&Corpus>,
) -> Result<BTreeMap<String, ReplyHistory>, CliError> {
    match train {
        Some(corpus) => Ok(build_reply_pairs(corpus, cfg.config.provider.max_pairs)?),
        None => Ok(BTreeMap::new()),
    }
}

pub(crate) fn prepare_output(
    cfg: &LoadedConfig,
    overrides: &BTreeMap<String, String>,
) -> Result<std::path::PathBuf, CliError> {
    let dir = cfg.output_dir();
    io::create_dir(&dir)?;
    io::write_text(&dir.join("config.toml"), &cfg.source)?;
    if !overrides.is_empty() {
        io::write_json(&dir.join("overrides.json"), overrides)?;
    }
    Ok(dir)
}
