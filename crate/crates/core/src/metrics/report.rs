//! Repeated-subsample aggregation of the realism metrics.
//!
//! Each of `k` repetitions draws `n` pairs without replacement (seed
//! `seed + repetition`), averages every metric over the draw, and the report
//! carries the mean and sample standard deviation of those `k` averages.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::correlation::label_correlation;
use super::embedding::{embedding_distance, DistanceKind};
use super::text::{bleu, length_ratio, ngram_precision, DEFAULT_EPSILON, DEFAULT_MAX_N};
use super::MetricError;
use crate::behavior::Language;
use crate::seed;

pub const DEFAULT_N: usize = 100;
pub const DEFAULT_K: usize = 10;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Label categories in report order.
pub const TWEETEVAL_CATEGORIES: [&str; 6] = ["topics", "emotions", "sentiment", "offensive", "hate", "irony"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Post,
    Reply,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LabelScores {
    pub original: Vec<f64>,
    pub generated: Vec<f64>,
}

/// One original text and its imitation, with optional embeddings and label scores.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalPair {
    pub original: String,
    pub generated: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub original_embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub labels: BTreeMap<String, LabelScores>,
}

impl EvalPair {
    pub fn new(original: impl Into<String>, generated: impl Into<String>) -> Self {
        Self {
            original: original.into(),
            generated: generated.into(),
            ..Self::default()
        }
    }
}

/// Subclass names per label category.
pub type LabelSchema = BTreeMap<String, Vec<String>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricParams {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub max_n: usize,
    pub epsilon: f64,
    pub distance: DistanceKind,
}

impl Default for MetricParams {
    fn default() -> Self {
        Self {
            n: DEFAULT_N,
            k: DEFAULT_K,
            seed: 0,
            max_n: DEFAULT_MAX_N,
            epsilon: DEFAULT_EPSILON,
            distance: DistanceKind::Euclidean,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub task: Task,
    pub language: Language,
    pub condition: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    /// Repetitions in which the metric was defined.
    pub repetitions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub schema_version: u32,
    pub task: Task,
    pub language: Language,
    pub condition: String,
    pub n_samples: usize,
    pub k_repetitions: usize,
    pub seed: u64,
    pub bleu_max_n: usize,
    pub bleu_epsilon: f64,
    pub distance: DistanceKind,
    pub label_aggregation: String,
    pub metrics: Vec<MetricRow>,
}

impl MetricReport {
    pub fn get(&self, name: &str) -> Option<&MetricRow> {
        self.metrics.iter().find(|r| r.name == name)
    }

    /// Plain-text table in the row order BLEU, unigram, bigram, length ratio,
    /// label correlations, embedding distance.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "task: {:?} | language: {} | condition: {} | n = {} | k = {} | seed = {}",
            self.task,
            self.language.code(),
            self.condition,
            self.n_samples,
            self.k_repetitions,
            self.seed
        );
        let rows: Vec<(String, String)> = self
            .metrics
            .iter()
            .map(|r| (display_name(&r.name), format!("{:.3} (± {:.3})", r.mean, r.std)))
            .collect();
        let width = rows.iter().map(|(n, _)| n.chars().count()).max().unwrap_or(0).max(6);
        let _ = writeln!(out, "{:<width$}  mean (± std)", "metric");
        let mut header_done = false;
        for (name, value) in rows {
            if name.starts_with("  ") && !header_done {
                let _ = writeln!(out, "{:<width$}", "TweetEval");
                header_done = true;
            }
            let _ = writeln!(out, "{name:<width$}  {value}");
        }
        let _ = writeln!(
            out,
            "BLEU max_n = {}, epsilon = {}; embedding distance: {}; label correlations aggregated by {}",
            self.bleu_max_n,
            self.bleu_epsilon,
            self.distance.name(),
            self.label_aggregation
        );
        out
    }
}

fn display_name(key: &str) -> String {
    match key {
        "bleu" => "BLEU".into(),
        "length_ratio" => "length ratio".into(),
        "embed_dist" => "embed. dist.".into(),
        other => match other.strip_prefix("tweeteval.") {
            Some(cat) => format!("  {cat}"),
            None => other.into(),
        },
    }
}

/// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Precision of a candidate too short to contain any n-gram counts as zero.
fn precision_or_zero(candidate: &str, reference: &str, n: usize) -> Result<f64, MetricError> {
    if crate::text::token_count(candidate) < n {
        return Ok(0.0);
    }
    ngram_precision(candidate, reference, n)
}

fn ordered_categories(pairs: &[EvalPair], schema: &LabelSchema) -> Vec<String> {
    let present = |cat: &str| schema.contains_key(cat) && pairs.iter().all(|p| p.labels.contains_key(cat));
    let mut cats: Vec<String> = TWEETEVAL_CATEGORIES
        .iter()
        .filter(|c| present(c))
        .map(|c| c.to_string())
        .collect();
    cats.extend(
        schema
            .keys()
            .filter(|c| !TWEETEVAL_CATEGORIES.contains(&c.as_str()) && present(c))
            .cloned(),
    );
    cats
}

/// Per-metric means over one subsample; `None` where a metric is undefined.
fn repetition_means(
    sample: &[&EvalPair],
    params: &MetricParams,
    categories: &[String],
    schema: &LabelSchema,
    with_embeddings: bool,
) -> Result<Vec<Option<f64>>, MetricError> {
    let mut bleus = Vec::with_capacity(sample.len());
    let mut unigrams = Vec::with_capacity(sample.len());
    let mut bigrams = Vec::with_capacity(sample.len());
    let mut ratios = Vec::with_capacity(sample.len());
    let mut dists = Vec::new();
    for p in sample {
        bleus.push(bleu(&p.generated, &p.original, params.max_n, params.epsilon)?);
        unigrams.push(precision_or_zero(&p.generated, &p.original, 1)?);
        bigrams.push(precision_or_zero(&p.generated, &p.original, 2)?);
        ratios.push(length_ratio(&p.generated, &p.original)?);
        if with_embeddings {
            let (a, b) = (p.original_embedding.as_deref(), p.generated_embedding.as_deref());
            dists.push(embedding_distance(
                a.unwrap_or_default(),
                b.unwrap_or_default(),
                params.distance,
            )?);
        }
    }
    let mut out = vec![
        Some(mean(&bleus)),
        Some(mean(&unigrams)),
        Some(mean(&bigrams)),
        Some(mean(&ratios)),
    ];
    for cat in categories {
        let original: Vec<Vec<f64>> = sample.iter().map(|p| p.labels[cat].original.clone()).collect();
        let generated: Vec<Vec<f64>> = sample.iter().map(|p| p.labels[cat].generated.clone()).collect();
        out.push(label_correlation(&original, &generated, &schema[cat])?.aggregate);
    }
    if with_embeddings {
        out.push(Some(mean(&dists)));
    }
    Ok(out)
}

pub fn aggregate_report(
    pairs: &[EvalPair],
    params: &MetricParams,
    schema: &LabelSchema,
    meta: &ReportMeta,
) -> Result<MetricReport, MetricError> {
    if params.n == 0 || params.k == 0 {
        return Err(MetricError::Input("n and k must be positive".into()));
    }
    if pairs.len() < params.n {
        return Err(MetricError::Input(format!(
            "{} pairs available but n = {} requested",
            pairs.len(),
            params.n
        )));
    }
    let categories = ordered_categories(pairs, schema);
    let with_embeddings = pairs
        .iter()
        .all(|p| p.original_embedding.is_some() && p.generated_embedding.is_some());

    let mut names: Vec<String> = ["bleu", "unigram", "bigram", "length_ratio"].map(String::from).to_vec();
    names.extend(categories.iter().map(|c| format!("tweeteval.{c}")));
    if with_embeddings {
        names.push("embed_dist".into());
    }

    let per_rep = (0..params.k)
        .into_par_iter()
        .map(|rep| {
            let mut rng = seed::rng(params.seed.wrapping_add(rep as u64));
            let idx = index::sample(&mut rng, pairs.len(), params.n);
            let sample: Vec<&EvalPair> = idx.iter().map(|i| &pairs[i]).collect();
            repetition_means(&sample, params, &categories, schema, with_embeddings)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let metrics = names
        .into_iter()
        .enumerate()
        .filter_map(|(m, name)| {
            let values: Vec<f64> = per_rep.iter().filter_map(|rep| rep[m]).collect();
            if values.is_empty() {
                log::warn!("metric {name} undefined in every repetition; omitted from report");
                return None;
            }
            Some(MetricRow {
                name,
                mean: mean(&values),
                std: sample_std(&values),
                repetitions: values.len(),
            })
        })
        .collect();

    Ok(MetricReport {
        schema_version: REPORT_SCHEMA_VERSION,
        task: meta.task,
        language: meta.language,
        condition: meta.condition.clone(),
        n_samples: params.n,
        k_repetitions: params.k,
        seed: params.seed,
        bleu_max_n: params.max_n,
        bleu_epsilon: params.epsilon,
        distance: params.distance,
        label_aggregation: "mean".into(),
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta() -> ReportMeta {
        ReportMeta {
            task: Task::Reply,
            language: Language::En,
            condition: "test".into(),
        }
    }

    fn identical_pairs(count: usize) -> Vec<EvalPair> {
        (0..count)
            .map(|i| {
                let text = format!("sample number {i} with several tokens");
                let emb = vec![i as f64, 1.0, -2.0];
                EvalPair {
                    original_embedding: Some(emb.clone()),
                    generated_embedding: Some(emb),
                    ..EvalPair::new(text.clone(), text)
                }
            })
            .collect()
    }

    #[test]
    fn identity_pairs_score_perfectly() {
        let pairs = identical_pairs(30);
        let params = MetricParams {
            n: 10,
            k: 4,
            ..MetricParams::default()
        };
        let r = aggregate_report(&pairs, &params, &LabelSchema::new(), &meta()).unwrap();
        assert_eq!(r.get("bleu").unwrap().mean, 1.0);
        assert_eq!(r.get("unigram").unwrap().mean, 1.0);
        assert_eq!(r.get("length_ratio").unwrap().mean, 1.0);
        assert_eq!(r.get("embed_dist").unwrap().mean, 0.0);
        assert!(r.metrics.iter().all(|m| m.std == 0.0));
    }

    #[test]
    fn single_repetition_has_zero_std() {
        let mut pairs = identical_pairs(20);
        for (i, p) in pairs.iter_mut().enumerate() {
            p.generated = format!("other {i}");
        }
        let params = MetricParams {
            n: 5,
            k: 1,
            ..MetricParams::default()
        };
        let r = aggregate_report(&pairs, &params, &LabelSchema::new(), &meta()).unwrap();
        assert!(r.metrics.iter().all(|m| m.std == 0.0 && m.repetitions == 1));
    }

    #[test]
    fn defaults_match_protocol() {
        let p = MetricParams::default();
        assert_eq!((p.n, p.k), (100, 10));
    }

    #[test]
    fn too_few_pairs() {
        let params = MetricParams {
            n: 5,
            ..MetricParams::default()
        };
        assert!(aggregate_report(&identical_pairs(4), &params, &LabelSchema::new(), &meta()).is_err());
    }

    #[test]
    fn std_is_sample_std_of_repetition_means() {
        let pairs: Vec<EvalPair> = (0..12)
            .map(|i| EvalPair::new("a b c d", ["a b c d", "a b", "x y z w v u"][i % 3]))
            .collect();
        let params = MetricParams {
            n: 4,
            k: 6,
            seed: 3,
            ..MetricParams::default()
        };
        let r = aggregate_report(&pairs, &params, &LabelSchema::new(), &meta()).unwrap();
        // recompute the per-repetition length-ratio means independently
        let means: Vec<f64> = (0..6)
            .map(|rep| {
                let mut rng = seed::rng(3 + rep as u64);
                let idx = index::sample(&mut rng, 12, 4);
                idx.iter()
                    .map(|i| crate::text::token_count(&pairs[i].generated) as f64 / 4.0)
                    .sum::<f64>()
                    / 4.0
            })
            .collect();
        let row = r.get("length_ratio").unwrap();
        let m = means.iter().sum::<f64>() / 6.0;
        let s = (means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 5.0).sqrt();
        assert!((row.mean - m).abs() < 1e-12);
        assert!((row.std - s).abs() < 1e-12);
        assert_eq!(
            r,
            aggregate_report(&pairs, &params, &LabelSchema::new(), &meta()).unwrap()
        );
    }

    #[test]
    fn label_rows_follow_table_order() {
        let mut schema = LabelSchema::new();
        schema.insert("sentiment".into(), vec!["neg".into(), "pos".into()]);
        schema.insert("topics".into(), vec!["a".into(), "b".into()]);
        let pairs: Vec<EvalPair> = (0..10)
            .map(|i| {
                let x = i as f64 / 10.0;
                let mut p = EvalPair::new("a b", "a b");
                p.labels.insert(
                    "sentiment".into(),
                    LabelScores {
                        original: vec![x, 1.0 - x],
                        generated: vec![x, 1.0 - x],
                    },
                );
                p.labels.insert(
                    "topics".into(),
                    LabelScores {
                        original: vec![x, 0.5],
                        generated: vec![x * x, 0.5],
                    },
                );
                p
            })
            .collect();
        let params = MetricParams {
            n: 10,
            k: 1,
            ..MetricParams::default()
        };
        let r = aggregate_report(&pairs, &params, &schema, &meta()).unwrap();
        let names: Vec<&str> = r.metrics.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "bleu",
                "unigram",
                "bigram",
                "length_ratio",
                "tweeteval.topics",
                "tweeteval.sentiment"
            ]
        );
        assert!((r.get("tweeteval.sentiment").unwrap().mean - 1.0).abs() < 1e-12);
        let table = r.to_table();
        assert!(table.find("BLEU").unwrap() < table.find("TweetEval").unwrap());
        assert!(table.find("  topics").unwrap() < table.find("  sentiment").unwrap());
    }

    #[test]
    fn sample_std_textbook() {
        assert_eq!(sample_std(&[1.0]), 0.0);
        assert!((sample_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]) - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
    }
}
