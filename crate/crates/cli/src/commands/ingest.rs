use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use serde::Serialize;

use super::{embedder, prepare_output};
use crate::config::{LoadedConfig, TaskKind};
use crate::error::CliError;
use crate::io;
use twon_core::ingest::{
    build_likelihood_dataset, check_balance, filter_corpus, select_active_users, split, Provenance, SkippedUser,
};

#[derive(Clone, Debug, Serialize)]
pub struct IngestSummary {
    pub provenance: Provenance,
    pub kept: usize,
    pub train_samples: usize,
    pub test_samples: usize,
    pub train_users: Vec<String>,
    pub test_users: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub likelihood: Option<LikelihoodSummary>,
}

#[derive(Clone, Debug, Serialize)]
pub struct LikelihoodSummary {
    pub train_examples: usize,
    pub test_examples: usize,
    pub skipped: Vec<SkippedUser>,
}

/// Filters, selects active users and splits a raw corpus; for the likelihood
/// task it also writes balanced example sets for both splits.
pub fn cmd_ingest(cfg: &LoadedConfig, overrides: &BTreeMap<String, String>) -> Result<PathBuf, CliError> {
    cfg.validate()?;
    let corpus_path = cfg.required("corpus", &cfg.config.data.corpus)?;
    let ic = &cfg.config.ingest;
    let raw = io::read_corpus(&corpus_path)?;
    let filtered = filter_corpus(&raw, ic.min_chars);
    let active = select_active_users(&filtered, ic.top_k)?;
    let (train, test) = split(&active, ic.train_fraction, cfg.config.seed)?;

    let dir = prepare_output(cfg, overrides)?;
    io::write_corpus(&dir.join("train.jsonl"), &train)?;
    io::write_corpus(&dir.join("test.jsonl"), &test)?;

    let likelihood = if cfg.config.task == TaskKind::Likelihood {
        let source = embedder(cfg)?;
        // Negatives may be posts by users on the other side of the split, so
        // examples are built on the whole corpus and then divided by owner.
        let build = build_likelihood_dataset(&active, source.as_ref(), cfg.config.seed, ic.history_cap)?;
        let train_users: BTreeSet<String> = train.users().into_iter().collect();
        let (train_examples, test_examples): (Vec<_>, Vec<_>) = build
            .examples
            .into_iter()
            .partition(|e| e.user.as_ref().is_some_and(|u| train_users.contains(u)));
        check_balance(&train_examples)?;
        check_balance(&test_examples)?;
        io::write_jsonl(&dir.join("likelihood_train.jsonl"), &train_examples)?;
        io::write_jsonl(&dir.join("likelihood_test.jsonl"), &test_examples)?;
        Some(LikelihoodSummary {
            train_examples: train_examples.len(),
            test_examples: test_examples.len(),
            skipped: build.skipped,
        })
    } else {
        None
    };

    let summary = IngestSummary {
        provenance: active.provenance.clone(),
        kept: active.len(),
        train_samples: train.len(),
        test_samples: test.len(),
        train_users: train.users(),
        test_users: test.users(),
        likelihood,
    };
    io::write_json(&dir.join("ingest_summary.json"), &summary)?;
    Ok(dir)
}
