//! Central-difference check of the backpropagated gradients of every head.
//!
//! Run with `cargo run --example gradient_check`.
//!
//! The library loss is evaluated in f64, so parameters whose gradient is
//! below roughly 1e-7 are resolved only to a few digits: the difference
//! quotient cannot resolve changes smaller than about ulp(loss) / (2 eps).
//! The largest relative error is printed with the gradient magnitude and
//! absolute difference it occurred at.

use agreelab::corpus::Number;
use agreelab::model::{init_params, Head, ModelConfig};
use agreelab::numeric::{grad_check, Rng};
use agreelab::train::{batch_loss, Target, TaskBatch, TaskInstance};

fn instances(head: Head, rng: &mut Rng, vocab: usize, tags: usize) -> Vec<TaskInstance> {
    (0..4)
        .map(|_| {
            let len = 2 + rng.below(5);
            let tokens: Vec<usize> = (0..len).map(|_| 2 + rng.below(vocab - 2)).collect();
            match head {
                Head::Agreement => TaskInstance {
                    tokens,
                    target: Target::Number(if rng.bernoulli(0.5) {
                        Number::Pl
                    } else {
                        Number::Sg
                    }),
                },
                Head::Supertag => {
                    let t = (0..len).map(|_| rng.below(tags)).collect();
                    TaskInstance::tagging(tokens, t).expect("lengths match")
                }
                Head::Lm => TaskInstance::lm(tokens, 1),
            }
        })
        .collect()
}

fn main() -> agreelab::Result<()> {
    let (d, vocab, tags) = (8, 50, 12);
    for head in [Head::Agreement, Head::Supertag, Head::Lm] {
        for seed in 1..=3 {
            let cfg = ModelConfig::new(d, vocab, tags, &[head])?;
            let params = init_params(&cfg, seed)?;
            let insts = instances(head, &mut Rng::new(seed), vocab, tags);
            let refs: Vec<&TaskInstance> = insts.iter().collect();
            let batch = TaskBatch::from_instances(&refs, 0)?;
            let (loss, grads) = batch_loss(&params, &batch)?;
            let report = grad_check(
                &params,
                |p| batch_loss(p, &batch).map(|r| r.0).unwrap_or(f64::NAN),
                &grads,
                1e-5,
            )?;
            println!(
                "{head:<9} seed {seed}: loss {loss:.4}, {} parameters, max relative error {:.2e} at |grad| {:.1e}, |difference| {:.1e}",
                report.checked,
                report.max_rel_error,
                report.analytic.abs(),
                (report.analytic - report.numeric).abs()
            );
        }
    }
    Ok(())
}
