//! Preprocessing filters.
//!
//! A sample is dropped, in this order of precedence, when its text
//!
//! 1. contains a URL ([`URL_PATTERN`]),
//! 2. starts with `RT ` or `RT@` (a retweet), or
//! 3. has fewer than `min_chars` Unicode scalar values.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{Corpus, Provenance, RawSample};

pub const DEFAULT_MIN_CHARS: usize = 32;

/// Scheme URLs, `www.` hosts, and bare `host.tld/...` or `host.tld` tokens
/// for a fixed set of common top-level domains.
pub const URL_PATTERN: &str = r"(?i)\b(?:https?://\S+|www\.\S+|[a-z0-9-]+(?:\.[a-z0-9-]+)*\.(?:com|org|net|edu|gov|de|eu|uk|io|ly|co|me|tv|info|app|link)(?:/\S*)?\b)";

fn url_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(URL_PATTERN).expect("URL pattern compiles"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    Url,
    Retweet,
    TooShort,
    /// Removed by active-user selection rather than a text rule.
    InactiveUser,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Keep,
    Drop(DropReason),
}

pub fn filter_sample(sample: &RawSample, min_chars: usize) -> Verdict {
    let text = &sample.text;
    if url_regex().is_match(text) {
        Verdict::Drop(DropReason::Url)
    } else if text.starts_with("RT ") || text.starts_with("RT@") {
        Verdict::Drop(DropReason::Retweet)
    } else if text.chars().count() < min_chars {
        Verdict::Drop(DropReason::TooShort)
    } else {
        Verdict::Keep
    }
}

/// Applies [`filter_sample`] to every sample. Drop counts are added to the
/// corpus' existing provenance, so chained filtering keeps the ledger whole.
pub fn filter_corpus(corpus: &Corpus, min_chars: usize) -> Corpus {
    let mut provenance: Provenance = corpus.provenance.clone();
    let mut samples = Vec::with_capacity(corpus.len());
    for s in &corpus.samples {
        match filter_sample(s, min_chars) {
            Verdict::Keep => samples.push(s.clone()),
            Verdict::Drop(reason) => *provenance.dropped.entry(reason).or_default() += 1,
        }
    }
    Corpus { samples, provenance }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::Language;
    use crate::ingest::SampleKind;

    fn sample(text: &str) -> RawSample {
        RawSample {
            user_id: "u".into(),
            text: text.into(),
            kind: SampleKind::Post,
            reply_to_text: None,
            topic: None,
            language: Language::En,
            timestamp: 0,
        }
    }

    #[test]
    fn retweets_are_dropped() {
        assert_eq!(
            filter_sample(&sample("RT @x great point"), 32),
            Verdict::Drop(DropReason::Retweet)
        );
        assert_eq!(
            filter_sample(&sample("RT@x great point"), 1),
            Verdict::Drop(DropReason::Retweet)
        );
        let long = "RTL is a broadcaster and this sentence is long enough";
        assert_eq!(filter_sample(&sample(long), 32), Verdict::Keep);
    }

    #[test]
    fn length_boundary_is_strict() {
        let s31 = "a".repeat(31);
        let s32 = "a".repeat(32);
        assert_eq!(
            filter_sample(&sample(&s31), DEFAULT_MIN_CHARS),
            Verdict::Drop(DropReason::TooShort)
        );
        assert_eq!(filter_sample(&sample(&s32), DEFAULT_MIN_CHARS), Verdict::Keep);
        // scalar values, not bytes
        assert_eq!(
            filter_sample(&sample(&"ü".repeat(32)), DEFAULT_MIN_CHARS),
            Verdict::Keep
        );
    }

    #[test]
    fn urls_are_dropped() {
        for text in [
            "read this https://a.b/c",
            "see http://example.org for the full statement today",
            "details at www.bundestag.de/abc and more words to pad it out",
            "go to example.com/path because it is relevant to all of us",
            "bit.ly short links are also links, padded to length here",
        ] {
            assert_eq!(
                filter_sample(&sample(text), 1),
                Verdict::Drop(DropReason::Url),
                "{text}"
            );
        }
        let clean = "We need a serious debate on pensions. Full stop. Now.";
        assert_eq!(filter_sample(&sample(clean), 32), Verdict::Keep);
    }

    #[test]
    fn provenance_accumulates() {
        let c = Corpus::new(vec![
            sample("short"),
            sample("RT @a something something something long"),
            sample("https://x.y/z plus some more words to make it long"),
            sample("this one is long enough to survive every single rule"),
        ]);
        let f = filter_corpus(&c, DEFAULT_MIN_CHARS);
        assert_eq!(f.len(), 1);
        assert_eq!(f.provenance.input, 4);
        assert_eq!(f.provenance.total_dropped(), 3);
        assert_eq!(filter_corpus(&f, DEFAULT_MIN_CHARS), f);
    }
}
