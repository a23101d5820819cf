use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceKind {
    #[default]
    Euclidean,
    /// `1 - cos(a, b)`; zero vectors are rejected.
    Cosine,
}

impl DistanceKind {
    pub fn name(self) -> &'static str {
        match self {
            DistanceKind::Euclidean => "euclidean",
            DistanceKind::Cosine => "cosine",
        }
    }
}

pub fn embedding_distance(a: &[f64], b: &[f64], kind: DistanceKind) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::Input(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    match kind {
        DistanceKind::Euclidean => Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()),
        DistanceKind::Cosine => {
            let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
            if na == 0.0 || nb == 0.0 {
                return Err(MetricError::Input("cosine distance of a zero vector".into()));
            }
            Ok((1.0 - dot / (na * nb)).max(0.0))
        }
    }
}
