use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use twon_core::likelihood::{loss_and_grad, loss_only};
use twon_core::{EmbeddingVector, LikelihoodExample, ScorerParams};

const STEP: f64 = 1e-4;
const KINK_MARGIN: f64 = 1e-3;
const TOLERANCE: f64 = 1e-5;

fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> EmbeddingVector {
    EmbeddingVector((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

fn random_params(rng: &mut ChaCha8Rng, d: usize) -> ScorerParams {
    let flat: Vec<f64> = (0..ScorerParams::flat_len(d))
        .map(|_| rng.gen_range(-1.0..1.0))
        .collect();
    ScorerParams::from_flat(d, &flat).unwrap()
}

fn random_batch(rng: &mut ChaCha8Rng, d: usize) -> Vec<LikelihoodExample> {
    (0..rng.gen_range(1..5))
        .map(|_| {
            let rows = rng.gen_range(1..5);
            let history = (0..rows).map(|_| random_vec(rng, d)).collect();
            LikelihoodExample::new(history, random_vec(rng, d), rng.gen_range(0..2))
        })
        .collect()
}

fn pre_activations(
    x: &Array2<f64>,
    w1: &Array2<f64>,
    b1: &Array1<f64>,
    w2: &Array2<f64>,
    b2: &Array1<f64>,
) -> Vec<f64> {
    let z1 = x.dot(w1) + b1;
    let z2 = z1.mapv(|v| v.max(0.0)).dot(w2) + b2;
    z1.iter().chain(z2.iter()).copied().collect()
}

/// True if some ReLU input sits close enough to zero that a finite-difference
/// step could cross the kink.
fn near_kink(p: &ScorerParams, batch: &[LikelihoodExample]) -> bool {
    let d = p.dim();
    batch.iter().any(|ex| {
        let rows: Vec<f64> = ex.history.iter().flat_map(|r| r.0.clone()).collect();
        let h = Array2::from_shape_vec((ex.history.len(), d), rows).unwrap();
        let post = Array2::from_shape_vec((1, d), ex.post.0.clone()).unwrap();
        pre_activations(&h, &p.w_h1, &p.b_h1, &p.w_h2, &p.b_h2)
            .into_iter()
            .chain(pre_activations(&post, &p.w_p1, &p.b_p1, &p.w_p2, &p.b_p2))
            .any(|z| z.abs() < KINK_MARGIN)
    })
}

fn numeric_grad(p: &ScorerParams, batch: &[LikelihoodExample]) -> Vec<f64> {
    let d = p.dim();
    let base = p.to_flat();
    (0..base.len())
        .map(|i| {
            let mut plus = base.clone();
            plus[i] += STEP;
            let mut minus = base.clone();
            minus[i] -= STEP;
            let lp = loss_only(&ScorerParams::from_flat(d, &plus).unwrap(), batch).unwrap();
            let lm = loss_only(&ScorerParams::from_flat(d, &minus).unwrap(), batch).unwrap();
            (lp - lm) / (2.0 * STEP)
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn analytic_gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for draw in 0..100 {
        let d = [2, 3, 4][draw % 3];
        let (params, batch) = loop {
            let p = random_params(&mut rng, d);
            let b = random_batch(&mut rng, d);
            if !near_kink(&p, &b) {
                break (p, b);
            }
        };
        let (loss, grad) = loss_and_grad(&params, &batch).unwrap();
        assert!((loss - loss_only(&params, &batch).unwrap()).abs() < 1e-15);
        let analytic = grad.to_flat();
        let numeric = numeric_grad(&params, &batch);
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, n)| a - n).collect();
        let scale = norm(&analytic).max(norm(&numeric));
        let rel = if scale == 0.0 { 0.0 } else { norm(&diff) / scale };
        worst = worst.max(rel);
        assert!(rel < TOLERANCE, "draw {draw} (d = {d}): relative error {rel:e}");
    }
    println!("worst relative gradient error over 100 draws: {worst:e}");
}
