//! Generates a synthetic agreement corpus and summarises it.
//!
//! Run with `cargo run --example synthetic_corpus -- [n_sentences] [seed]`.

use std::collections::BTreeMap;

use agreelab::corpus::{
    build_vocab, count_attractors, extract_all, generate_synthetic, GrammarConfig, VocabRule,
};
use agreelab::eval::eval_baselines;
use agreelab::numeric::Rng;

fn main() -> agreelab::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(2000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(7);

    let sentences = generate_synthetic(&GrammarConfig::default(), n, &mut Rng::new(seed))?;
    for s in sentences.iter().take(5) {
        let tagged: Vec<String> = s
            .tokens
            .iter()
            .zip(&s.pos)
            .map(|(w, p)| format!("{w}/{p}"))
            .collect();
        println!("{}", tagged.join(" "));
    }

    let mut histogram: BTreeMap<String, usize> = BTreeMap::new();
    for s in &sentences {
        if let Some(c) = count_attractors(s) {
            *histogram.entry(c.bucket()).or_default() += 1;
        }
    }
    println!("\nattractor buckets: {histogram:?}");

    let vocab = build_vocab(&sentences, VocabRule::MinCount(1));
    let (instances, _) = extract_all(&sentences, &vocab);
    let (train, test) = instances.split_at(instances.len() * 4 / 5);
    let b = eval_baselines(train, test, &sentences)?;
    println!(
        "vocabulary {} types, {} agreement instances",
        vocab.len(),
        instances.len()
    );
    println!(
        "majority baseline ({:?}) {:.3}, last-noun baseline {:.3}",
        b.majority_label.expect("non-empty training split"),
        b.majority_accuracy,
        b.last_noun_accuracy
    );
    Ok(())
}
