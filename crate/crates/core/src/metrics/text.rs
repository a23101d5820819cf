//! Token-overlap metrics: BLEU, modified n-gram precision and length ratio.

use std::collections::HashMap;

use super::MetricError;
use crate::text::tokenize;

pub const DEFAULT_MAX_N: usize = 4;
pub const DEFAULT_EPSILON: f64 = 0.1;

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Clipped n-gram matches and the candidate n-gram total.
fn clipped_matches(candidate: &[String], reference: &[String], n: usize) -> (usize, usize) {
    let total = candidate.len().saturating_sub(n - 1);
    if total == 0 {
        return (0, 0);
    }
    let reference = ngram_counts(reference, n);
    let matched = ngram_counts(candidate, n)
        .into_iter()
        .map(|(gram, count)| count.min(reference.get(gram).copied().unwrap_or(0)))
        .sum();
    (matched, total)
}

fn nonempty_tokens(text: &str, what: &str) -> Result<Vec<String>, MetricError> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(MetricError::Input(format!("{what} has no tokens")));
    }
    Ok(tokens)
}

/// Sentence BLEU with additive-epsilon smoothing.
///
/// Orders `1..=N` with `N = min(max_n, candidate length)` are combined by a
/// uniform geometric mean. An order with zero clipped matches contributes
/// `epsilon / total` instead of zero. The brevity penalty is
/// `exp(1 - ref_len / cand_len)` for candidates shorter than the reference.
pub fn bleu(candidate: &str, reference: &str, max_n: usize, epsilon: f64) -> Result<f64, MetricError> {
    if !(1..=4).contains(&max_n) {
        return Err(MetricError::Input(format!("max_n must be in 1..=4, got {max_n}")));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(MetricError::Input("smoothing epsilon must be positive".into()));
    }
    let cand = nonempty_tokens(candidate, "candidate")?;
    let refr = nonempty_tokens(reference, "reference")?;
    let orders = max_n.min(cand.len());
    let mut log_sum = 0.0;
    for n in 1..=orders {
        let (matched, total) = clipped_matches(&cand, &refr, n);
        let p = if matched == 0 {
            epsilon / total as f64
        } else {
            matched as f64 / total as f64
        };
        log_sum += p.ln();
    }
    let (c, r) = (cand.len() as f64, refr.len() as f64);
    let brevity = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    Ok(brevity * (log_sum / orders as f64).exp())
}

/// Modified (clipped) n-gram precision of `candidate` against `reference`.
pub fn ngram_precision(candidate: &str, reference: &str, n: usize) -> Result<f64, MetricError> {
    if !(1..=2).contains(&n) {
        return Err(MetricError::Input(format!("n must be 1 or 2, got {n}")));
    }
    let cand = tokenize(candidate);
    if cand.len() < n {
        return Err(MetricError::Input(format!(
            "candidate has {} token(s), needs at least {n}",
            cand.len()
        )));
    }
    let (matched, total) = clipped_matches(&cand, &tokenize(reference), n);
    Ok(matched as f64 / total as f64)
}

/// Generated token count over original token count.
pub fn length_ratio(generated: &str, original: &str) -> Result<f64, MetricError> {
    let orig = nonempty_tokens(original, "original")?;
    Ok(tokenize(generated).len() as f64 / orig.len() as f64)
}
