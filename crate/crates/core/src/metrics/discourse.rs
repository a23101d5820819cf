//! Discourse metric `q` over a simulated transcript.

use std::fs;
use std::path::Path;

use super::MetricError;
use crate::model::Transcript;
use crate::text::tokenize;

/// A scalar evaluation of a whole transcript.
pub trait QPlugin: Send + Sync {
    fn name(&self) -> &str;
    fn evaluate(&self, transcript: &Transcript) -> Result<f64, MetricError>;
}

/// Fraction of messages containing at least one lexicon term.
///
/// Matching is case-insensitive on NFC tokens. A multi-word term hits when
/// its tokens occur contiguously in the message.
#[derive(Clone, Debug, PartialEq)]
pub struct LexiconQ {
    name: String,
    terms: Vec<Vec<String>>,
}

fn lower_tokens(s: &str) -> Vec<String> {
    tokenize(&s.to_lowercase())
}

impl LexiconQ {
    /// Parses one term per line; blank lines and `#` comments are skipped.
    pub fn parse(name: &str, source: &str) -> Result<Self, MetricError> {
        let terms: Vec<Vec<String>> = source
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(lower_tokens)
            .filter(|t| !t.is_empty())
            .collect();
        if terms.is_empty() {
            return Err(MetricError::Lexicon(name.to_owned(), "no terms".into()));
        }
        Ok(Self {
            name: name.to_owned(),
            terms,
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, MetricError> {
        let name = path.display().to_string();
        let source = fs::read_to_string(path).map_err(|e| MetricError::Lexicon(name.clone(), e.to_string()))?;
        Self::parse(&name, &source)
    }

    pub fn hits(&self, text: &str) -> bool {
        let tokens = lower_tokens(text);
        self.terms
            .iter()
            .any(|term| tokens.windows(term.len()).any(|w| w == term.as_slice()))
    }
}

impl QPlugin for LexiconQ {
    fn name(&self) -> &str {
        "lexicon_fraction"
    }

    fn evaluate(&self, transcript: &Transcript) -> Result<f64, MetricError> {
        let hits = transcript.messages().iter().filter(|m| self.hits(&m.text)).count();
        Ok(hits as f64 / transcript.len() as f64)
    }
}

pub fn discourse_metric_q(transcript: &Transcript, plugin: &dyn QPlugin) -> Result<f64, MetricError> {
    if transcript.is_empty() {
        return Err(MetricError::Input("empty transcript".into()));
    }
    plugin.evaluate(transcript)
}
