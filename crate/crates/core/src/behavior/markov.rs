//! Word-level Markov chain baseline generator.
//!
//! Tokens come from [`crate::text::tokenize`]. Each text is framed by start
//! and end sentinels. [`MarkovModel::probability`] reports add-one smoothed
//! transition probabilities; [`MarkovModel::generate`] samples only
//! transitions that were observed, so generated text is always stitched
//! together from real n-grams of the corpus.

use std::collections::{BTreeMap, BTreeSet};

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seed;
use crate::text::tokenize;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Token {
    Start,
    Word(String),
    End,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarkovError {
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("order must be 1 or 2, got {0}")]
    Order(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovModel {
    order: usize,
    transitions: BTreeMap<Vec<Token>, BTreeMap<Token, u64>>,
    vocabulary: BTreeSet<String>,
}

impl MarkovModel {
    pub fn train<S: AsRef<str>>(corpus: &[S], order: usize) -> Result<Self, MarkovError> {
        if !(1..=2).contains(&order) {
            return Err(MarkovError::Order(order));
        }
        let mut transitions: BTreeMap<Vec<Token>, BTreeMap<Token, u64>> = BTreeMap::new();
        let mut vocabulary = BTreeSet::new();
        for text in corpus {
            let words = tokenize(text.as_ref());
            if words.is_empty() {
                continue;
            }
            let mut context = vec![Token::Start; order];
            for w in words.into_iter().map(Token::Word).chain(std::iter::once(Token::End)) {
                if let Token::Word(s) = &w {
                    vocabulary.insert(s.clone());
                }
                *transitions
                    .entry(context.clone())
                    .or_default()
                    .entry(w.clone())
                    .or_default() += 1;
                context.remove(0);
                context.push(w);
            }
        }
        if vocabulary.is_empty() {
            return Err(MarkovError::EmptyCorpus);
        }
        Ok(Self {
            order,
            transitions,
            vocabulary,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocabulary(&self) -> &BTreeSet<String> {
        &self.vocabulary
    }

    /// Raw transition count.
    pub fn count(&self, context: &[Token], next: &Token) -> u64 {
        self.transitions
            .get(context)
            .and_then(|row| row.get(next))
            .copied()
            .unwrap_or(0)
    }

    /// Add-one smoothed `P(next | context)` over the vocabulary plus the end sentinel.
    pub fn probability(&self, context: &[Token], next: &Token) -> f64 {
        let outcomes = self.vocabulary.len() as f64 + 1.0;
        let total: u64 = self.transitions.get(context).map_or(0, |row| row.values().sum());
        (self.count(context, next) as f64 + 1.0) / (total as f64 + outcomes)
    }

    /// Samples up to `max_tokens` tokens. Deterministic in `seed`.
    pub fn generate(&self, seed: u64, max_tokens: usize) -> String {
        let mut rng = seed::rng(seed);
        let mut context = vec![Token::Start; self.order];
        let mut words: Vec<&str> = Vec::new();
        while words.len() < max_tokens {
            let Some(row) = self.transitions.get(&context) else {
                break;
            };
            let (choices, weights): (Vec<&Token>, Vec<u64>) = row.iter().map(|(t, c)| (t, *c)).unzip();
            let dist = WeightedIndex::new(&weights).expect("observed rows have positive counts");
            let next = choices[dist.sample(&mut rng)];
            match next {
                Token::Word(w) => words.push(w),
                Token::End | Token::Start => break,
            }
            context.remove(0);
            context.push(next.clone());
        }
        words.join(" ")
    }
}

pub fn markov_train<S: AsRef<str>>(corpus: &[S], order: usize) -> Result<MarkovModel, MarkovError> {
    MarkovModel::train(corpus, order)
}

pub fn markov_generate(model: &MarkovModel, seed: u64, max_tokens: usize) -> String {
    model.generate(seed, max_tokens)
}
