//! Synthetic reply-likelihood data with a known separating direction.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{EmbeddingVector, LikelihoodExample};
use crate::seed;

/// Balanced examples in `d` dimensions that a hyperplane separates exactly.
///
/// The post is `±margin · v + noise` with `v` the first basis vector and the
/// noise confined to the other coordinates, so `label = [post_0 > 0]`. History
/// rows are non-negative noise. Examples alternate positive and negative and
/// are attributed to ten users, each with as many positives as negatives when
/// `n` is a multiple of 20.
pub fn separable(d: usize, n: usize, margin: f64, seed: u64) -> Vec<LikelihoodExample> {
    assert!(d >= 2, "need at least two dimensions");
    let mut rng = seed::rng(seed);
    let noise = Normal::new(0.0, 0.5).expect("valid sigma");
    (0..n)
        .map(|i| {
            let label = u8::from(i % 2 == 0);
            let sign = if label == 1 { 1.0 } else { -1.0 };
            let mut post = vec![sign * margin];
            post.extend((1..d).map(|_| noise.sample(&mut rng)));
            let rows = rng.gen_range(1..=4);
            let history = (0..rows)
                .map(|_| EmbeddingVector((0..d).map(|_| noise.sample(&mut rng).abs()).collect()))
                .collect();
            LikelihoodExample::new(history, EmbeddingVector(post), label)
                .with_user(format!("synthetic{}", (i / 2) % 10))
        })
        .collect()
}
