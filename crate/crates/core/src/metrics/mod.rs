//! Realism metrics for imitated text and the discourse metric for simulated transcripts.

mod correlation;
mod discourse;
mod embedding;
mod report;
mod text;

use thiserror::Error;

pub use correlation::{label_correlation, pearson, LabelCorrelation, SubclassCorrelation};
pub use discourse::{discourse_metric_q, LexiconQ, QPlugin};
pub use embedding::{embedding_distance, DistanceKind};
pub use report::{
    aggregate_report, sample_std, EvalPair, LabelSchema, LabelScores, MetricParams, MetricReport, MetricRow,
    ReportMeta, Task, DEFAULT_K, DEFAULT_N, REPORT_SCHEMA_VERSION, TWEETEVAL_CATEGORIES,
};
pub use text::{bleu, length_ratio, ngram_precision, DEFAULT_EPSILON, DEFAULT_MAX_N};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("correlation undefined: zero variance")]
    UndefinedCorrelation,
    #[error("lexicon {0}: {1}")]
    Lexicon(String, String),
}
