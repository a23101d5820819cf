use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twon_core::ingest::{
    filter_corpus, filter_sample, Corpus, DropReason, RawSample, SampleKind, Verdict, DEFAULT_MIN_CHARS,
};
use twon_core::Language;

const PIECES: [&str; 10] = [
    "word",
    "ü",
    "RT",
    "@x",
    "https://t.co/x",
    "www.site.de",
    "Bundestag",
    "ok",
    "例",
    "  ",
];

fn sample(text: String, i: usize) -> RawSample {
    RawSample {
        user_id: format!("u{}", i % 37),
        text,
        kind: SampleKind::Post,
        reply_to_text: None,
        topic: None,
        language: Language::De,
        timestamp: i as i64,
    }
}

fn fuzz_corpus(seed: u64, size: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..size)
        .map(|i| {
            let parts = rng.gen_range(0..12);
            let text: Vec<&str> = (0..parts).map(|_| PIECES[rng.gen_range(0..PIECES.len())]).collect();
            let sep = if rng.gen_bool(0.5) { " " } else { "" };
            sample(text.join(sep), i)
        })
        .collect();
    Corpus::new(samples)
}

#[test]
fn ten_thousand_sample_fuzz_corpus() {
    let corpus = fuzz_corpus(1, 10_000);
    let once = filter_corpus(&corpus, DEFAULT_MIN_CHARS);
    assert_eq!(once.provenance.input, 10_000);
    assert_eq!(once.len() + once.provenance.total_dropped(), 10_000);
    assert!(!once.is_empty() && once.provenance.total_dropped() > 0);
    for reason in [DropReason::Url, DropReason::Retweet, DropReason::TooShort] {
        assert!(
            once.provenance.dropped.get(&reason).copied().unwrap_or(0) > 0,
            "{reason:?}"
        );
    }
    assert!(once
        .samples
        .iter()
        .all(|s| filter_sample(s, DEFAULT_MIN_CHARS) == Verdict::Keep));
    assert_eq!(filter_corpus(&once, DEFAULT_MIN_CHARS), once);
}

#[test]
fn threshold_boundary() {
    let keep = |n: usize| filter_sample(&sample("x".repeat(n), 0), DEFAULT_MIN_CHARS);
    assert_eq!(keep(31), Verdict::Drop(DropReason::TooShort));
    assert_eq!(keep(32), Verdict::Keep);
}

proptest! {
    #[test]
    fn filtering_is_idempotent_and_conserves_counts(seed in any::<u64>(), size in 0usize..300, min_chars in 0usize..60) {
        let corpus = fuzz_corpus(seed, size);
        let once = filter_corpus(&corpus, min_chars);
        prop_assert_eq!(once.len() + once.provenance.total_dropped(), size);
        prop_assert_eq!(&filter_corpus(&once, min_chars), &once);
        let kept: Vec<&RawSample> = corpus.samples.iter().filter(|s| filter_sample(s, min_chars) == Verdict::Keep).collect();
        prop_assert_eq!(kept, once.samples.iter().collect::<Vec<_>>());
    }
}
