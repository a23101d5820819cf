use ndarray::{Array1, Array2};
use rand::distributions::{Distribution, Uniform};

use super::LikelihoodError;
use crate::seed;

/// Weights of the scorer. Matrices multiply row vectors from the right
/// (`x · W`), so `w[[i, j]]` connects input `i` to output `j`.
///
/// The flat order, used by the optimizer and the params file, is
/// `w_h1, b_h1, w_h2, b_h2, w_p1, b_p1, w_p2, b_p2, w_out, b_out`
/// with matrices in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct ScorerParams {
    pub w_h1: Array2<f64>,
    pub b_h1: Array1<f64>,
    pub w_h2: Array2<f64>,
    pub b_h2: Array1<f64>,
    pub w_p1: Array2<f64>,
    pub b_p1: Array1<f64>,
    pub w_p2: Array2<f64>,
    pub b_p2: Array1<f64>,
    pub w_out: Array1<f64>,
    pub b_out: f64,
}

impl ScorerParams {
    pub fn zeros(d: usize) -> Self {
        Self {
            w_h1: Array2::zeros((d, d)),
            b_h1: Array1::zeros(d),
            w_h2: Array2::zeros((d, d)),
            b_h2: Array1::zeros(d),
            w_p1: Array2::zeros((d, d)),
            b_p1: Array1::zeros(d),
            w_p2: Array2::zeros((d, d)),
            b_p2: Array1::zeros(d),
            w_out: Array1::zeros(d),
            b_out: 0.0,
        }
    }

    /// Every entry uniform in `[-1/sqrt(d), 1/sqrt(d)]`.
    pub fn init(d: usize, seed: u64) -> Self {
        let bound = 1.0 / (d as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        let mut rng = seed::rng(seed);
        let flat: Vec<f64> = (0..Self::flat_len(d)).map(|_| dist.sample(&mut rng)).collect();
        Self::from_flat(d, &flat).expect("length matches by construction")
    }

    pub fn dim(&self) -> usize {
        self.b_h1.len()
    }

    pub fn flat_len(d: usize) -> usize {
        4 * d * d + 5 * d + 1
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::flat_len(self.dim()));
        for (w, b) in [
            (&self.w_h1, &self.b_h1),
            (&self.w_h2, &self.b_h2),
            (&self.w_p1, &self.b_p1),
            (&self.w_p2, &self.b_p2),
        ] {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out.extend(self.w_out.iter());
        out.push(self.b_out);
        out
    }

    pub fn from_flat(d: usize, flat: &[f64]) -> Result<Self, LikelihoodError> {
        if flat.len() != Self::flat_len(d) {
            return Err(LikelihoodError::Shape(format!(
                "expected {} values for d = {d}, got {}",
                Self::flat_len(d),
                flat.len()
            )));
        }
        let mut rest = flat;
        let mut take = |len: usize| {
            let (head, tail) = rest.split_at(len);
            rest = tail;
            head.to_vec()
        };
        let w_h1 = Array2::from_shape_vec((d, d), take(d * d)).expect("d*d values");
        let b_h1 = Array1::from(take(d));
        let w_h2 = Array2::from_shape_vec((d, d), take(d * d)).expect("d*d values");
        let b_h2 = Array1::from(take(d));
        let w_p1 = Array2::from_shape_vec((d, d), take(d * d)).expect("d*d values");
        let b_p1 = Array1::from(take(d));
        let w_p2 = Array2::from_shape_vec((d, d), take(d * d)).expect("d*d values");
        let b_p2 = Array1::from(take(d));
        let w_out = Array1::from(take(d));
        let b_out = take(1)[0];
        Ok(Self {
            w_h1,
            b_h1,
            w_h2,
            b_h2,
            w_p1,
            b_p1,
            w_p2,
            b_p2,
            w_out,
            b_out,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|v| v.is_finite())
    }

    /// Named views in flat order, for diagnostics and gradient checks.
    pub fn tensor_sizes(d: usize) -> [(&'static str, usize); 10] {
        [
            ("w_h1", d * d),
            ("b_h1", d),
            ("w_h2", d * d),
            ("b_h2", d),
            ("w_p1", d * d),
            ("b_p1", d),
            ("w_p2", d * d),
            ("b_p2", d),
            ("w_out", d),
            ("b_out", 1),
        ]
    }
}
