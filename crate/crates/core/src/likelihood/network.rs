use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;

use super::{EmbeddingVector, LikelihoodError, LikelihoodExample, ScorerParams};

fn relu(x: &Array2<f64>) -> Array2<f64> {
    x.mapv(|v| v.max(0.0))
}

fn relu_mask(pre: &Array2<f64>) -> Array2<f64> {
    pre.mapv(|v| if v > 0.0 { 1.0 } else { 0.0 })
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Binary cross-entropy from the logit, stable for large |z|.
fn bce_from_logit(z: f64, label: f64) -> f64 {
    z.max(0.0) - z * label + (-z.abs()).exp().ln_1p()
}

/// Activations kept for the backward pass.
struct Trace {
    history: Array2<f64>,
    h_pre1: Array2<f64>,
    h_act1: Array2<f64>,
    h_pre2: Array2<f64>,
    h_out: Array2<f64>,
    post: Array2<f64>,
    p_pre1: Array2<f64>,
    p_act1: Array2<f64>,
    p_pre2: Array2<f64>,
    p_out: Array2<f64>,
    pooled: Array1<f64>,
    logit: f64,
}

fn stack(rows: &[EmbeddingVector], d: usize) -> Result<Array2<f64>, LikelihoodError> {
    if rows.is_empty() {
        return Err(LikelihoodError::Shape("history must have at least one row".into()));
    }
    let mut m = Array2::zeros((rows.len(), d));
    for (i, r) in rows.iter().enumerate() {
        if r.dim() != d {
            return Err(LikelihoodError::Shape(format!(
                "history row {i} has dimension {} instead of {d}",
                r.dim()
            )));
        }
        m.row_mut(i).assign(&ArrayView1::from(r.as_slice()));
    }
    Ok(m)
}

fn run(params: &ScorerParams, history: &[EmbeddingVector], post: &EmbeddingVector) -> Result<Trace, LikelihoodError> {
    let d = params.dim();
    if post.dim() != d {
        return Err(LikelihoodError::Shape(format!(
            "post has dimension {} instead of {d}",
            post.dim()
        )));
    }
    let history = stack(history, d)?;
    let post = stack(std::slice::from_ref(post), d)?;
    if history.iter().chain(post.iter()).any(|v| !v.is_finite()) {
        return Err(LikelihoodError::NonFinite("input embeddings".into()));
    }

    let h_pre1 = history.dot(&params.w_h1) + &params.b_h1;
    let h_act1 = relu(&h_pre1);
    let h_pre2 = h_act1.dot(&params.w_h2) + &params.b_h2;
    let h_out = relu(&h_pre2);

    let p_pre1 = post.dot(&params.w_p1) + &params.b_p1;
    let p_act1 = relu(&p_pre1);
    let p_pre2 = p_act1.dot(&params.w_p2) + &params.b_p2;
    let p_out = relu(&p_pre2);

    let interaction = &h_out * &p_out.row(0);
    let pooled = interaction.mean_axis(Axis(0)).expect("at least one row");
    let logit = params.w_out.dot(&pooled) + params.b_out;
    if !logit.is_finite() || pooled.iter().any(|v| !v.is_finite()) {
        return Err(LikelihoodError::NonFinite("forward pass".into()));
    }
    Ok(Trace {
        history,
        h_pre1,
        h_act1,
        h_pre2,
        h_out,
        post,
        p_pre1,
        p_act1,
        p_pre2,
        p_out,
        pooled,
        logit,
    })
}

/// Reply probability for `post` given the user's `history` rows.
pub fn forward(
    params: &ScorerParams,
    history: &[EmbeddingVector],
    post: &EmbeddingVector,
) -> Result<f64, LikelihoodError> {
    run(params, history, post).map(|t| sigmoid(t.logit))
}

fn check_label(label: u8) -> Result<f64, LikelihoodError> {
    match label {
        0 => Ok(0.0),
        1 => Ok(1.0),
        other => Err(LikelihoodError::Label(other)),
    }
}

/// Loss of one example and the gradient of that loss, scaled by `scale`.
fn example_grad(
    params: &ScorerParams,
    ex: &LikelihoodExample,
    scale: f64,
) -> Result<(f64, ScorerParams), LikelihoodError> {
    let label = check_label(ex.label)?;
    let t = run(params, &ex.history, &ex.post)?;
    let loss = bce_from_logit(t.logit, label);
    let n = t.history.nrows() as f64;

    // d loss / d logit
    let g_logit = (sigmoid(t.logit) - label) * scale;
    let g_w_out = &t.pooled * g_logit;
    let g_pooled = &params.w_out * g_logit;

    // Mean pooling spreads the gradient evenly over rows.
    let g_interaction_row = &g_pooled / n;
    let p_row = t.p_out.row(0);
    let g_h_out = Array2::from_shape_fn(t.h_out.raw_dim(), |(_, j)| g_interaction_row[j] * p_row[j]);
    let g_p_out = (t.h_out.sum_axis(Axis(0)) * &g_interaction_row).insert_axis(Axis(0));

    let g_h_pre2 = g_h_out * relu_mask(&t.h_pre2);
    let g_w_h2 = t.h_act1.t().dot(&g_h_pre2);
    let g_b_h2 = g_h_pre2.sum_axis(Axis(0));
    let g_h_pre1 = g_h_pre2.dot(&params.w_h2.t()) * relu_mask(&t.h_pre1);
    let g_w_h1 = t.history.t().dot(&g_h_pre1);
    let g_b_h1 = g_h_pre1.sum_axis(Axis(0));

    let g_p_pre2 = g_p_out * relu_mask(&t.p_pre2);
    let g_w_p2 = t.p_act1.t().dot(&g_p_pre2);
    let g_b_p2 = g_p_pre2.sum_axis(Axis(0));
    let g_p_pre1 = g_p_pre2.dot(&params.w_p2.t()) * relu_mask(&t.p_pre1);
    let g_w_p1 = t.post.t().dot(&g_p_pre1);
    let g_b_p1 = g_p_pre1.sum_axis(Axis(0));

    Ok((
        loss,
        ScorerParams {
            w_h1: g_w_h1,
            b_h1: g_b_h1,
            w_h2: g_w_h2,
            b_h2: g_b_h2,
            w_p1: g_w_p1,
            b_p1: g_b_p1,
            w_p2: g_w_p2,
            b_p2: g_b_p2,
            w_out: g_w_out,
            b_out: g_logit,
        },
    ))
}

fn accumulate(acc: &mut ScorerParams, g: &ScorerParams) {
    acc.w_h1 += &g.w_h1;
    acc.b_h1 += &g.b_h1;
    acc.w_h2 += &g.w_h2;
    acc.b_h2 += &g.b_h2;
    acc.w_p1 += &g.w_p1;
    acc.b_p1 += &g.b_p1;
    acc.w_p2 += &g.w_p2;
    acc.b_p2 += &g.b_p2;
    acc.w_out += &g.w_out;
    acc.b_out += g.b_out;
}

/// Mean binary cross-entropy over `batch` and its gradient.
///
/// Examples are evaluated in parallel and summed in batch order, so the
/// result does not depend on the thread count.
pub fn loss_and_grad(
    params: &ScorerParams,
    batch: &[LikelihoodExample],
) -> Result<(f64, ScorerParams), LikelihoodError> {
    if batch.is_empty() {
        return Err(LikelihoodError::EmptyBatch);
    }
    let scale = 1.0 / batch.len() as f64;
    let parts = batch
        .par_iter()
        .map(|ex| example_grad(params, ex, scale))
        .collect::<Result<Vec<_>, _>>()?;
    let mut grad = ScorerParams::zeros(params.dim());
    let mut loss = 0.0;
    for (l, g) in &parts {
        loss += l;
        accumulate(&mut grad, g);
    }
    let loss = loss * scale;
    if !loss.is_finite() || !grad.is_finite() {
        return Err(LikelihoodError::NonFinite("loss or gradient".into()));
    }
    Ok((loss, grad))
}

/// Mean binary cross-entropy without the gradient.
pub fn loss_only(params: &ScorerParams, batch: &[LikelihoodExample]) -> Result<f64, LikelihoodError> {
    if batch.is_empty() {
        return Err(LikelihoodError::EmptyBatch);
    }
    let mut total = 0.0;
    for ex in batch {
        let label = check_label(ex.label)?;
        total += bce_from_logit(run(params, &ex.history, &ex.post)?.logit, label);
    }
    Ok(total / batch.len() as f64)
}
