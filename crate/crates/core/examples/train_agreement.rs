//! Trains the agreement head alone and reports accuracy per attractor bucket.
//!
//! Run with `cargo run --release --example train_agreement`.

use agreelab::corpus::{build_vocab, extract_all, generate_synthetic, GrammarConfig, VocabRule};
use agreelab::eval::{eval_agreement, ATTRACTOR_BUCKETS};
use agreelab::model::{init_params, Head, ModelConfig};
use agreelab::numeric::Rng;
use agreelab::train::{train_single, Task, TaskData, TaskInstance, TrainConfig};

fn main() -> agreelab::Result<()> {
    let sentences = generate_synthetic(&GrammarConfig::default(), 4000, &mut Rng::new(11))?;
    let (train, test) = sentences.split_at(3200);
    let vocab = build_vocab(train, VocabRule::MinCount(2));
    let (train_agr, _) = extract_all(train, &vocab);
    let (test_agr, _) = extract_all(test, &vocab);

    let data = TaskData::new(
        Task::Agreement,
        train_agr.iter().map(TaskInstance::agreement).collect(),
        test_agr
            .iter()
            .take(200)
            .map(TaskInstance::agreement)
            .collect(),
        vocab.pad_id(),
    )?;
    let model = ModelConfig::new(16, vocab.len(), 0, &[Head::Agreement])?;
    let cfg = TrainConfig {
        epochs: 4,
        batch_size: 32,
        seed: 1,
        ..TrainConfig::default()
    };
    let out = train_single(init_params(&model, 1)?, &data, &cfg)?;
    for m in &out.metrics {
        println!(
            "epoch {} loss {:.4} val accuracy {:?}",
            m.epoch, m.train_loss, m.val_metric
        );
    }

    let report = eval_agreement(&out.params, &test_agr)?;
    println!(
        "test accuracy {:.4} over {}",
        report.overall_accuracy, report.n
    );
    for b in ATTRACTOR_BUCKETS {
        if let Some(s) = report.accuracy_by_attractor.get(b) {
            println!("  {b:>2} attractors: {:.4} (n = {})", s.accuracy, s.n);
        }
    }
    Ok(())
}
