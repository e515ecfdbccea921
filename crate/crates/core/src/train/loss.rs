use rayon::prelude::*;

use crate::corpus::Number;
use crate::error::{Error, Result};
use crate::model::{backward, encode, Head, ModelParams};
use crate::numeric::{log_sum_exp, sigmoid, softplus};

use super::batch::{Task, TaskBatch};

/// Sentences per parallel work unit. Fixed so the reduction order, and hence
/// every floating-point sum, is independent of the thread count.
const CHUNK: usize = 8;

/// Binary cross-entropy of a logit against a number label (plural = 1),
/// evaluated stably as `softplus(z) - y z`.
pub fn agreement_nll(logit: f64, label: Number) -> f64 {
    softplus(logit) - label.as_label() * logit
}

/// Negative log-probability of class `target` under `softmax(logits)`.
pub fn softmax_nll(logits: &[f64], target: usize) -> f64 {
    log_sum_exp(logits) - logits[target]
}

/// Mean negative log of the probabilities assigned to the correct outcomes.
pub fn mean_nll(p_correct: &[f64]) -> f64 {
    -p_correct.iter().map(|p| p.ln()).sum::<f64>() / p_correct.len() as f64
}

/// `L1/(1+r) + r/(1+r) L2`.
pub fn combine_losses(l1: f64, l2: f64, r: f64) -> Result<f64> {
    let (w1, w2) = combine_weights(r)?;
    Ok(w1 * l1 + w2 * l2)
}

pub(crate) fn combine_weights(r: f64) -> Result<(f64, f64)> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Config(format!(
            "task weight ratio r must be finite and >= 0, got {r}"
        )));
    }
    Ok((1.0 / (1.0 + r), r / (1.0 + r)))
}

/// Sum of per-sentence losses for row `i`, accumulating unnormalized gradients.
fn sentence_loss(
    params: &ModelParams,
    batch: &TaskBatch,
    i: usize,
    grads: &mut ModelParams,
) -> Result<f64> {
    let tokens = batch.row(i);
    let trace = encode(params, tokens)?;
    let d = params.d();
    let n = tokens.len();
    let mut dh = vec![0.0; n * d];
    let loss = match batch.task {
        Task::Agreement => {
            let label = batch.number(i).expect("agreement batch");
            let head = params
                .head(Head::Agreement)
                .ok_or_else(missing(Head::Agreement))?;
            let h = trace.last_h();
            let z = crate::model::agreement_logit(head, h);
            let dz = sigmoid(z) - label.as_label();
            let gh = grads.head_mut(Head::Agreement).expect("same structure");
            gh.weight.add_outer(h, &[dz]);
            gh.bias.data_mut()[0] += dz;
            for (o, w) in dh[(n - 1) * d..].iter_mut().zip(head.weight.data()) {
                *o = dz * w;
            }
            agreement_nll(z, label)
        }
        Task::Supertag | Task::Lm => {
            let which = batch.task.head();
            let head = params.head(which).ok_or_else(missing(which))?;
            let labels = batch.row_labels(i).expect("sequence batch");
            let k = head.outputs();
            let mut total = 0.0;
            for (t, &y) in labels.iter().enumerate() {
                if y >= k {
                    return Err(Error::Label(format!(
                        "label {y} at position {t} is outside the {which} head's {k} classes"
                    )));
                }
                let h = trace.h(t);
                let mut p = crate::model::linear(head, h);
                total += softmax_nll(&p, y);
                crate::numeric::softmax_in_place(&mut p);
                p[y] -= 1.0;
                let gh = grads.head_mut(which).expect("same structure");
                gh.weight.add_outer(h, &p);
                for (b, v) in gh.bias.data_mut().iter_mut().zip(&p) {
                    *b += v;
                }
                head.weight.matvec_acc(&p, &mut dh[t * d..(t + 1) * d]);
            }
            total
        }
    };
    backward(params, &trace, &dh, grads)?;
    Ok(loss)
}

fn missing(head: Head) -> impl Fn() -> Error {
    move || Error::Config(format!("model has no {head} head"))
}

/// Sample-averaged loss of `batch` and its exact gradient.
pub fn batch_loss(params: &ModelParams, batch: &TaskBatch) -> Result<(f64, ModelParams)> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch(format!(
            "{} batch has no sentences",
            batch.task
        )));
    }
    if params.head(batch.task.head()).is_none() {
        return Err(missing(batch.task.head())());
    }
    let idx: Vec<usize> = (0..batch.len()).collect();
    let parts: Vec<Result<(f64, ModelParams)>> = idx
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut g = params.zeros_like();
            let mut loss = 0.0;
            for &i in chunk {
                loss += sentence_loss(params, batch, i, &mut g)?;
            }
            Ok((loss, g))
        })
        .collect();
    let mut total = 0.0;
    let mut grads: Option<ModelParams> = None;
    for part in parts {
        let (l, g) = part?;
        total += l;
        match grads.as_mut() {
            None => grads = Some(g),
            Some(acc) => acc.add_scaled(&g, 1.0),
        }
    }
    let mut grads = grads.expect("non-empty batch");
    let denom = match batch.task {
        Task::Agreement => batch.len(),
        Task::Supertag | Task::Lm => batch.n_tokens(),
    } as f64;
    grads.scale(1.0 / denom);
    Ok((total / denom, grads))
}

fn expect_task(batch: &TaskBatch, task: Task) -> Result<()> {
    if batch.task != task {
        return Err(Error::Label(format!(
            "expected a {task} batch, got {}",
            batch.task
        )));
    }
    Ok(())
}

/// Mean binary cross-entropy over the sentences of the batch.
pub fn loss_agreement(params: &ModelParams, batch: &TaskBatch) -> Result<(f64, ModelParams)> {
    expect_task(batch, Task::Agreement)?;
    batch_loss(params, batch)
}

/// Mean cross-entropy over all tokens of the batch.
pub fn loss_supertag(params: &ModelParams, batch: &TaskBatch) -> Result<(f64, ModelParams)> {
    expect_task(batch, Task::Supertag)?;
    batch_loss(params, batch)
}

/// Token-averaged next-word negative log-likelihood in nats.
pub fn loss_lm(params: &ModelParams, batch: &TaskBatch) -> Result<(f64, ModelParams)> {
    expect_task(batch, Task::Lm)?;
    batch_loss(params, batch)
}

/// Token-averaged next-word negative log-likelihood in bits.
pub fn loss_lm_bits(params: &ModelParams, batch: &TaskBatch) -> Result<f64> {
    Ok(loss_lm(params, batch)?.0 / std::f64::consts::LN_2)
}
