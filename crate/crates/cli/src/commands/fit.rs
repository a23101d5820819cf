use std::collections::BTreeMap;

use serde::Serialize;

use super::prepare_output;
use crate::config::LoadedConfig;
use crate::error::CliError;
use crate::io;
use twon_core::mechanics::{fit_mechanics, FeedObservation, FitResult};
use twon_core::MechanicsConfig;

#[derive(Clone, Debug, Serialize)]
struct FitOutput<'a> {
    observations: usize,
    alpha: f64,
    family: &'a [MechanicsConfig],
    #[serde(flatten)]
    result: &'a FitResult,
}

pub fn cmd_fit_mechanics(cfg: &LoadedConfig, overrides: &BTreeMap<String, String>) -> Result<FitResult, CliError> {
    cfg.validate()?;
    let path = cfg.required("observations", &cfg.config.data.observations)?;
    let observations: Vec<FeedObservation> = io::read_jsonl(&path)?;
    let family = cfg.config.fit.family();
    for member in &family {
        member
            .validate()
            .map_err(|e| CliError::Config(format!("fit.family: {e}")))?;
    }
    let alpha = cfg.config.fit.alpha;
    let result = fit_mechanics(&observations, &family, alpha)?;

    let dir = prepare_output(cfg, overrides)?;
    let out = FitOutput {
        observations: observations.len(),
        alpha,
        family: &family,
        result: &result,
    };
    io::write_json(&dir.join("fit.json"), &out)?;
    Ok(result)
}
