use serde::{Deserialize, Serialize};

use super::network::forward;
use super::{LikelihoodError, LikelihoodExample, ScorerParams};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifierReport {
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub accuracy: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub threshold: f64,
}

impl ClassifierReport {
    /// Builds the report from `(score, label)` pairs; `score >= threshold` is positive.
    pub fn from_scores(scored: impl IntoIterator<Item = (f64, u8)>, threshold: f64) -> Self {
        let (mut tp, mut fp, mut tn, mut fn_) = (0usize, 0usize, 0usize, 0usize);
        for (score, label) in scored {
            match (score >= threshold, label == 1) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
            }
        }
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            f1,
            precision,
            recall,
            accuracy: ratio(tp + tn, tp + fp + tn + fn_),
            true_positives: tp,
            false_positives: fp,
            true_negatives: tn,
            false_negatives: fn_,
            threshold,
        }
    }
}

pub fn evaluate_classifier(
    params: &ScorerParams,
    dataset: &[LikelihoodExample],
    threshold: f64,
) -> Result<ClassifierReport, LikelihoodError> {
    if dataset.is_empty() {
        return Err(LikelihoodError::EmptyDataset);
    }
    let scored = dataset
        .iter()
        .map(|ex| forward(params, &ex.history, &ex.post).map(|s| (s, ex.label)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ClassifierReport::from_scores(scored, threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::likelihood::EmbeddingVector;

    #[test]
    fn perfect_predictions() {
        let r = ClassifierReport::from_scores([(0.9, 1), (0.1, 0), (0.7, 1), (0.2, 0)], 0.5);
        assert_eq!((r.f1, r.precision, r.recall, r.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn constant_half_score_counts_as_positive() {
        // Zero params score exactly 0.5 everywhere.
        let data: Vec<LikelihoodExample> = (0..10)
            .map(|i| {
                LikelihoodExample::new(
                    vec![EmbeddingVector(vec![1.0])],
                    EmbeddingVector(vec![1.0]),
                    (i % 2) as u8,
                )
            })
            .collect();
        let r = evaluate_classifier(&ScorerParams::zeros(1), &data, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(r.recall, 1.0);
        assert_eq!(r.precision, 0.5);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.accuracy, 0.5);
    }

    #[test]
    fn all_negative_predictions_have_zero_f1() {
        let r = ClassifierReport::from_scores([(0.1, 1), (0.2, 0)], 0.5);
        assert_eq!((r.f1, r.precision, r.recall), (0.0, 0.0, 0.0));
        assert_eq!(r.accuracy, 0.5);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert!(evaluate_classifier(&ScorerParams::zeros(1), &[], 0.5).is_err());
    }
}
