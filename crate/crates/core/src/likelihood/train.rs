use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::network::loss_and_grad;
use super::optim::{AdamW, AdamWConfig};
use super::{LikelihoodError, LikelihoodExample, ScorerParams};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let adam = AdamWConfig::default();
        Self {
            lr: adam.learning_rate,
            weight_decay: adam.weight_decay,
            epochs: 50,
            batch_size: 16,
            seed: 0,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.epsilon,
        }
    }
}

impl TrainConfig {
    fn adamw(&self) -> AdamWConfig {
        AdamWConfig {
            learning_rate: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            weight_decay: self.weight_decay,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedScorer {
    pub params: ScorerParams,
    /// Mean training loss of each epoch, averaged over its mini-batches by size.
    pub loss_curve: Vec<f64>,
}

/// Mini-batch AdamW training from a seeded uniform initialization.
///
/// The initialization and every epoch's shuffle derive from `config.seed`, so
/// equal seeds give bit-identical parameters.
pub fn train(dataset: &[LikelihoodExample], d: usize, config: &TrainConfig) -> Result<TrainedScorer, LikelihoodError> {
    if dataset.is_empty() {
        return Err(LikelihoodError::EmptyDataset);
    }
    if config.batch_size == 0 {
        return Err(LikelihoodError::Config("batch_size must be positive".into()));
    }
    if config.lr.is_nan() || config.lr <= 0.0 || config.weight_decay < 0.0 {
        return Err(LikelihoodError::Config(
            "lr must be positive and weight_decay non-negative".into(),
        ));
    }
    let mut params = ScorerParams::init(d, seed::derive(config.seed, &[0]));
    let mut flat = params.to_flat();
    let mut optimizer = AdamW::new(config.adamw(), flat.len());
    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut loss_curve = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        let mut rng = seed::rng(seed::derive(config.seed, &[1, epoch as u64]));
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<LikelihoodExample> = chunk.iter().map(|&i| dataset[i].clone()).collect();
            let (loss, grad) = loss_and_grad(&params, &batch).map_err(|e| match e {
                LikelihoodError::NonFinite(_) => LikelihoodError::Diverged { epoch, loss: f64::NAN },
                other => other,
            })?;
            epoch_loss += loss * batch.len() as f64;
            optimizer.step(&mut flat, &grad.to_flat());
            params = ScorerParams::from_flat(d, &flat)?;
        }
        let mean = epoch_loss / dataset.len() as f64;
        if !mean.is_finite() || !params.is_finite() {
            return Err(LikelihoodError::Diverged { epoch, loss: mean });
        }
        log::debug!("epoch {epoch}: loss {mean:.6}");
        loss_curve.push(mean);
    }
    Ok(TrainedScorer { params, loss_curve })
}
