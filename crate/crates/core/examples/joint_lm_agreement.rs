//! Trains language modelling and agreement jointly with `L1/(1+r) + r/(1+r) L2`
//! and compares the next-word probe with the agreement head.
//!
//! Run with `cargo run --release --example joint_lm_agreement -- [r]`.

use agreelab::corpus::{
    build_vocab, extract_all, generate_synthetic, replace_rare, GrammarConfig, VocabRule,
};
use agreelab::eval::{eval_perplexity, eval_probes};
use agreelab::model::{init_params, Head, ModelConfig};
use agreelab::numeric::Rng;
use agreelab::train::{train_joint, Task, TaskData, TaskInstance, TrainConfig};

fn main() -> agreelab::Result<()> {
    let r: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(100.0);
    let grammar = GrammarConfig::default();
    let sentences = generate_synthetic(&grammar, 3000, &mut Rng::new(5))?;
    let (train, test) = sentences.split_at(2400);
    let vocab = build_vocab(train, VocabRule::MinCount(1));
    let lm = |s: &[agreelab::corpus::Sentence]| -> agreelab::Result<Vec<TaskInstance>> {
        s.iter()
            .map(|x| Ok(TaskInstance::lm(replace_rare(x, &vocab)?, vocab.eos_id())))
            .collect()
    };
    let (train_agr, _) = extract_all(train, &vocab);
    let (test_agr, _) = extract_all(test, &vocab);
    let lm_data = TaskData::new(Task::Lm, lm(train)?, vec![], vocab.pad_id())?;
    let agr_data = TaskData::new(
        Task::Agreement,
        train_agr.iter().map(TaskInstance::agreement).collect(),
        vec![],
        vocab.pad_id(),
    )?;

    let model = ModelConfig::new(16, vocab.len(), 0, &[Head::Lm, Head::Agreement])?;
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 32,
        r,
        ..TrainConfig::default()
    };
    let out = train_joint(init_params(&model, 1)?, &lm_data, &agr_data, &cfg)?;
    for m in &out.metrics {
        println!("epoch {} {} loss {:.4}", m.epoch, m.task, m.train_loss);
    }

    println!(
        "test perplexity {:.2}",
        eval_perplexity(&out.params, &lm(test)?)?
    );
    let probes = eval_probes(&out.params, &test_agr, test, &vocab, &grammar.verb_pairs())?;
    println!(
        "lexical probe accuracy {:.4}",
        probes.lexical.overall_accuracy
    );
    println!(
        "POS-class probe accuracy {:.4}",
        probes.pos.overall_accuracy
    );
    if let Some(h) = &probes.agreement_head {
        println!(
            "agreement head on the same preambles {:.4}",
            h.overall_accuracy
        );
    }
    Ok(())
}
