use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::prepare_output;
use crate::config::LoadedConfig;
use crate::error::CliError;
use crate::io;
use twon_core::ingest::check_balance;
use twon_core::likelihood::{
    encode_params, evaluate_classifier, train, ClassifierReport, ParamsSidecar, PARAMS_VERSION,
};
use twon_core::LikelihoodExample;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSummary {
    pub d: usize,
    pub params_sha256: String,
    pub train: ClassifierReport,
    pub test: ClassifierReport,
    pub final_loss: Option<f64>,
}

fn load(
    cfg: &LoadedConfig,
    field: &str,
    path: &Option<std::path::PathBuf>,
) -> Result<Vec<LikelihoodExample>, CliError> {
    let path = cfg.required(field, path)?;
    let examples: Vec<LikelihoodExample> = io::read_jsonl(&path)?;
    if examples.is_empty() {
        return Err(CliError::Data(format!("{} has no examples", path.display())));
    }
    check_balance(&examples)?;
    Ok(examples)
}

fn dimension(examples: &[LikelihoodExample], origin: &Path) -> Result<usize, CliError> {
    let d = examples[0].post.dim();
    if d == 0 {
        return Err(CliError::Data(format!(
            "{}: zero-dimensional embeddings",
            origin.display()
        )));
    }
    Ok(d)
}

/// Trains the reply-likelihood scorer and reports F1 on both splits.
pub fn cmd_train_scorer(cfg: &LoadedConfig, overrides: &BTreeMap<String, String>) -> Result<TrainSummary, CliError> {
    cfg.validate()?;
    let data = &cfg.config.data;
    let train_set = load(cfg, "likelihood_train", &data.likelihood_train)?;
    let test_set = load(cfg, "likelihood_test", &data.likelihood_test)?;
    let d = dimension(
        &train_set,
        &cfg.resolve(data.likelihood_train.as_deref().unwrap_or(Path::new(""))),
    )?;

    let config = cfg.config.scorer.train_config(cfg.config.seed);
    let trained = train(&train_set, d, &config)?;
    let threshold = cfg.config.scorer.threshold;
    let train_report = evaluate_classifier(&trained.params, &train_set, threshold)?;
    let test_report = evaluate_classifier(&trained.params, &test_set, threshold)?;

    let dir = prepare_output(cfg, overrides)?;
    let bytes = encode_params(&trained.params);
    io::write_bytes(&dir.join("params.bin"), &bytes)?;
    let sidecar = ParamsSidecar {
        format_version: PARAMS_VERSION,
        d,
        config,
        loss_curve: trained.loss_curve.clone(),
    };
    io::write_json(&dir.join("params.json"), &sidecar)?;
    io::write_json(&dir.join("eval_train.json"), &train_report)?;
    io::write_json(&dir.join("eval_test.json"), &test_report)?;

    let summary = TrainSummary {
        d,
        params_sha256: format!("{:x}", Sha256::digest(&bytes)),
        train: train_report,
        test: test_report,
        final_loss: trained.loss_curve.last().copied(),
    };
    io::write_json(&dir.join("train_summary.json"), &summary)?;
    Ok(summary)
}
