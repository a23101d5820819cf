use serde::{Deserialize, Serialize};

use super::MetricError;

/// Sample Pearson correlation. Zero variance in either input is an error.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64, MetricError> {
    if xs.len() != ys.len() {
        return Err(MetricError::Input(format!(
            "length mismatch: {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(MetricError::Input("pearson needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(MetricError::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubclassCorrelation {
    pub name: String,
    /// `None` when the subclass has zero variance in either set.
    pub r: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelCorrelation {
    pub subclasses: Vec<SubclassCorrelation>,
    /// Mean of the defined subclass correlations.
    pub aggregate: Option<f64>,
}

/// Per-subclass Pearson r between original and generated label scores.
///
/// `original[i][j]` is the score of subclass `j` for sample `i`.
pub fn label_correlation(
    original: &[Vec<f64>],
    generated: &[Vec<f64>],
    subclass_names: &[String],
) -> Result<LabelCorrelation, MetricError> {
    if original.len() != generated.len() {
        return Err(MetricError::Input(format!(
            "{} original vs {} generated label rows",
            original.len(),
            generated.len()
        )));
    }
    let width = subclass_names.len();
    if let Some(bad) = original.iter().chain(generated).find(|row| row.len() != width) {
        return Err(MetricError::Input(format!(
            "label row of width {} for {width} subclasses",
            bad.len()
        )));
    }
    let mut subclasses = Vec::with_capacity(width);
    for (j, name) in subclass_names.iter().enumerate() {
        let xs: Vec<f64> = original.iter().map(|r| r[j]).collect();
        let ys: Vec<f64> = generated.iter().map(|r| r[j]).collect();
        let r = match pearson(&xs, &ys) {
            Ok(r) => Some(r),
            Err(MetricError::UndefinedCorrelation) => None,
            Err(e) => return Err(e),
        };
        subclasses.push(SubclassCorrelation { name: name.clone(), r });
    }
    let defined: Vec<f64> = subclasses.iter().filter_map(|s| s.r).collect();
    let aggregate = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
    Ok(LabelCorrelation { subclasses, aggregate })
}
