//! Sources of text embeddings: a deterministic hashing baseline, fixture
//! files, and the sidecar's `/embed` endpoint.

use std::collections::HashMap;
use std::io::BufRead;

use serde::Deserialize;

use super::IngestError;
use crate::likelihood::EmbeddingVector;
use crate::seed;
use crate::sidecar::SidecarClient;
use crate::text::tokenize;

pub trait EmbeddingSource: Send + Sync {
    fn dim(&self) -> usize;
    /// One vector per input text, in input order.
    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, IngestError>;
}

/// Signed feature hashing of lowercased tokens, L2-normalized.
#[derive(Clone, Debug)]
pub struct HashingEmbedder {
    d: usize,
}

impl HashingEmbedder {
    pub fn new(d: usize) -> Self {
        assert!(d > 0, "embedding dimension must be positive");
        Self { d }
    }

    pub fn embed_one(&self, text: &str) -> EmbeddingVector {
        let mut v = vec![0.0; self.d];
        for token in tokenize(&text.to_lowercase()) {
            let h = seed::digest_str(&token);
            let slot = (h % self.d as u64) as usize;
            v[slot] += if (h >> 63) == 0 { 1.0 } else { -1.0 };
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        EmbeddingVector(v)
    }
}

impl EmbeddingSource for HashingEmbedder {
    fn dim(&self) -> usize {
        self.d
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, IngestError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }
}

#[derive(Deserialize)]
struct FixtureLine {
    text: String,
    vector: Vec<f64>,
}

/// Precomputed embeddings keyed by exact text. Lines: `{"text": .., "vector": [..]}`.
#[derive(Clone, Debug, Default)]
pub struct FixtureEmbeddings {
    d: usize,
    table: HashMap<String, EmbeddingVector>,
}

impl FixtureEmbeddings {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (String, Vec<f64>)>) -> Result<Self, IngestError> {
        let mut table = HashMap::new();
        let mut d = None;
        for (text, vector) in pairs {
            if *d.get_or_insert(vector.len()) != vector.len() {
                return Err(IngestError::Embedding(format!(
                    "fixture vector for {text:?} has a different dimension"
                )));
            }
            let v = EmbeddingVector::new(vector).map_err(|e| IngestError::Embedding(e.to_string()))?;
            table.insert(text, v);
        }
        let d = d.ok_or_else(|| IngestError::Embedding("empty embedding fixture".into()))?;
        Ok(Self { d, table })
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, IngestError> {
        let mut pairs = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line.map_err(|e| IngestError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: FixtureLine = serde_json::from_str(&line).map_err(|e| IngestError::Format {
                line: i + 1,
                reason: e.to_string(),
            })?;
            pairs.push((entry.text, entry.vector));
        }
        Self::from_pairs(pairs)
    }
}

impl EmbeddingSource for FixtureEmbeddings {
    fn dim(&self) -> usize {
        self.d
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, IngestError> {
        texts
            .iter()
            .map(|t| {
                self.table
                    .get(t)
                    .cloned()
                    .ok_or_else(|| IngestError::Embedding(format!("no fixture embedding for {t:?}")))
            })
            .collect()
    }
}

/// Embeddings from the sidecar, requested in fixed-size batches.
#[derive(Debug)]
pub struct RemoteEmbedder {
    client: SidecarClient,
    d: usize,
    pub batch_size: usize,
}

impl RemoteEmbedder {
    /// Queries `/healthz` for the dimension.
    pub fn connect(client: SidecarClient) -> Result<Self, IngestError> {
        let health = client.health().map_err(|e| IngestError::Embedding(e.to_string()))?;
        Ok(Self {
            client,
            d: health.d,
            batch_size: 32,
        })
    }
}

impl EmbeddingSource for RemoteEmbedder {
    fn dim(&self) -> usize {
        self.d
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<EmbeddingVector>, IngestError> {
        let mut out = Vec::with_capacity(texts.len());
        for chunk in texts.chunks(self.batch_size.max(1)) {
            let resp = self
                .client
                .embed(chunk)
                .map_err(|e| IngestError::Embedding(e.to_string()))?;
            if resp.d != self.d {
                return Err(IngestError::Embedding(format!(
                    "sidecar returned d = {} but /healthz reported {}",
                    resp.d, self.d
                )));
            }
            out.extend(resp.vectors.into_iter().map(EmbeddingVector));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hashing_is_deterministic_and_normalized() {
        let e = HashingEmbedder::new(16);
        let a = e.embed_one("The quick brown fox");
        assert_eq!(a, e.embed_one("the QUICK brown fox"));
        let norm: f64 = a.0.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(e.embed_one("   ").0.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn fixtures() {
        let src = "{\"text\":\"a\",\"vector\":[1,2]}\n{\"text\":\"b\",\"vector\":[3,4]}\n";
        let f = FixtureEmbeddings::read_jsonl(src.as_bytes()).unwrap();
        assert_eq!(f.dim(), 2);
        assert_eq!(f.embed(&["b".into()]).unwrap()[0].0, vec![3.0, 4.0]);
        assert!(f.embed(&["c".into()]).is_err());
        let ragged = "{\"text\":\"a\",\"vector\":[1,2]}\n{\"text\":\"b\",\"vector\":[3]}\n";
        assert!(FixtureEmbeddings::read_jsonl(ragged.as_bytes()).is_err());
    }
}
