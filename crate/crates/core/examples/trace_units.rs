//! Trains a small agreement model and prints, word by word, its plural
//! probability and a few hidden units on the four conditions of one frame.
//!
//! Run with `cargo run --release --example trace_units`.

use std::path::Path;

use agreelab::corpus::{build_vocab, extract_all, generate_synthetic, GrammarConfig, VocabRule};
use agreelab::eval::{expand_templates, PosLexicon, TemplateSuite};
use agreelab::experiment::trace_item;
use agreelab::model::{init_params, Head, ModelConfig};
use agreelab::numeric::Rng;
use agreelab::train::{train_single, Task, TaskData, TaskInstance, TrainConfig};

fn main() -> agreelab::Result<()> {
    let sentences = generate_synthetic(&GrammarConfig::default(), 3000, &mut Rng::new(3))?;
    let vocab = build_vocab(&sentences, VocabRule::MinCount(1));
    let (agr, _) = extract_all(&sentences, &vocab);
    let data = TaskData::new(
        Task::Agreement,
        agr.iter().map(TaskInstance::agreement).collect(),
        vec![],
        0,
    )?;
    let model = ModelConfig::new(8, vocab.len(), 0, &[Head::Agreement])?;
    let cfg = TrainConfig {
        epochs: 3,
        batch_size: 32,
        ..TrainConfig::default()
    };
    let params = train_single(init_params(&model, 1)?, &data, &cfg)?.params;

    let suite =
        TemplateSuite::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("templates/bock.toml"))?;
    let lexicon = PosLexicon::from_sentences(&sentences);
    for item in expand_templates(&suite)?.iter().filter(|i| i.frame == 1) {
        let rec = trace_item(&params, item, &vocab, &lexicon)?;
        println!("{} (expected {:?})", rec.name(), rec.label);
        for t in 0..rec.len() {
            let units: Vec<String> = rec.hidden[t][..3]
                .iter()
                .map(|v| format!("{v:+.3}"))
                .collect();
            println!(
                "  {:<10} p(plural) {:.3}  h0..h2 {}",
                rec.tokens[t],
                rec.p_plural[t],
                units.join(" ")
            );
        }
    }
    Ok(())
}
