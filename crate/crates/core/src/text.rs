//! Tokenization shared by the Markov baseline and the text metrics.
//!
//! Text is NFC-normalized and split on Unicode whitespace. Nothing else
//! (case, punctuation) is touched.

use unicode_normalization::UnicodeNormalization;

pub fn normalize(text: &str) -> String {
    text.nfc().collect()
}

pub fn tokenize(text: &str) -> Vec<String> {
    normalize(text).split_whitespace().map(str::to_owned).collect()
}

pub fn token_count(text: &str) -> usize {
    normalize(text).split_whitespace().count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_any_whitespace() {
        assert_eq!(tokenize("  a\tb\n c  "), vec!["a", "b", "c"]);
        assert!(tokenize("   ").is_empty());
    }

    #[test]
    fn composed_and_decomposed_forms_tokenize_equal() {
        // "é" as U+00E9 versus "e" + U+0301
        assert_eq!(tokenize("caf\u{e9} x"), tokenize("cafe\u{301} x"));
    }
}
