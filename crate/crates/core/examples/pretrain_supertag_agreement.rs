//! Pre-trains the encoder on supertagging, transfers it, then trains agreement
//! on a small sample; compares against agreement from scratch.
//!
//! Run with `cargo run --release --example pretrain_supertag_agreement`.

use agreelab::corpus::{
    build_vocab, extract_all, generate_synthetic, prune_supertags, replace_rare, GrammarConfig,
    VocabRule,
};
use agreelab::eval::{eval_agreement, eval_supertag};
use agreelab::model::{init_params, Head, ModelConfig};
use agreelab::numeric::Rng;
use agreelab::train::{
    pretrain_then_train, train_single, Task, TaskData, TaskInstance, TrainConfig,
};

fn main() -> agreelab::Result<()> {
    let sentences = generate_synthetic(&GrammarConfig::default(), 6000, &mut Rng::new(7))?;
    let (train, test) = sentences.split_at(5000);
    let vocab = build_vocab(train, VocabRule::MinCount(1));
    let tags = prune_supertags(train, 10)?;
    let tagged = |s: &[agreelab::corpus::Sentence]| -> agreelab::Result<Vec<TaskInstance>> {
        s.iter()
            .map(|x| {
                let st = x
                    .supertags
                    .as_ref()
                    .expect("synthetic sentences carry supertags");
                TaskInstance::tagging(replace_rare(x, &vocab)?, tags.encode(st))
            })
            .collect()
    };
    let (train_agr, _) = extract_all(train, &vocab);
    let (test_agr, _) = extract_all(test, &vocab);
    let supertag = TaskData::new(Task::Supertag, tagged(train)?, vec![], vocab.pad_id())?;
    let agreement = TaskData::new(
        Task::Agreement,
        train_agr
            .iter()
            .take(500)
            .map(TaskInstance::agreement)
            .collect(),
        vec![],
        vocab.pad_id(),
    )?;

    let d = 16;
    let tagger = ModelConfig::new(d, vocab.len(), tags.n_classes(), &[Head::Supertag])?;
    let agreer = ModelConfig::new(d, vocab.len(), 0, &[Head::Agreement])?;
    let phase = |epochs| TrainConfig {
        epochs,
        batch_size: 32,
        ..TrainConfig::default()
    };

    let pre = pretrain_then_train(
        init_params(&tagger, 1)?,
        &supertag,
        &phase(2),
        init_params(&agreer, 2)?,
        &agreement,
        &phase(8),
    )?;
    let tagging = eval_supertag(&pre.phase_a, &supertag.train, &tagged(test)?, &tags)?;
    println!(
        "supertag accuracy {:.4} (most-frequent-tag baseline {:.4})",
        tagging.accuracy, tagging.majority_per_word_accuracy
    );
    let scratch = train_single(init_params(&agreer, 2)?, &agreement, &phase(8))?;

    for (name, params) in [
        ("from scratch", &scratch.params),
        ("pre-trained", &pre.params),
    ] {
        let r = eval_agreement(params, &test_agr)?;
        println!(
            "{name:<12} overall {:.4}, 2+ attractors {:.4}",
            r.overall_accuracy,
            r.accuracy_at_least(2).unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
