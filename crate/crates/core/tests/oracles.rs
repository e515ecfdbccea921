mod common;

use agreelab::corpus::{
    build_vocab, count_attractors, extract_all, filter_intervening_noun, generate_synthetic,
    AgreementInstance, AttractorCount, GrammarConfig, Number, VocabRule,
};
use agreelab::eval::{bucket_report, eval_baselines, probe_lexical};
use agreelab::model::Head;
use agreelab::numeric::Rng;
use agreelab::train::{batch_loss, combine_losses, TaskBatch, TaskInstance};
use proptest::prelude::*;

fn mixed_heavy_corpus(n: usize, seed: u64) -> Vec<agreelab::corpus::Sentence> {
    let g = GrammarConfig {
        mixed_weight: 0.3,
        ..GrammarConfig::default()
    };
    generate_synthetic(&g, n, &mut Rng::new(seed)).unwrap()
}

#[test]
fn attractor_counts_match_rescan_including_mixed() {
    let sents = mixed_heavy_corpus(10_000, 77);
    let mut mixed = 0;
    for s in &sents {
        let got = count_attractors(s).map(|c| c.bucket());
        assert_eq!(got, common::oracle_bucket(s), "{:?}", s.tokens);
        mixed += usize::from(got.as_deref() == Some("MIXED"));
    }
    assert!(mixed > 500, "only {mixed} MIXED sentences");
}

#[test]
fn baselines_match_direct_recount() {
    let sents = mixed_heavy_corpus(10_000, 5);
    let vocab = build_vocab(&sents, VocabRule::MinCount(1));
    let (all, diags) = extract_all(&sents, &vocab);
    assert!(diags.is_empty());
    let (train, test) = all.split_at(6_000);
    let report = eval_baselines(train, test, &sents).unwrap();
    let labels: Vec<Number> = train.iter().map(|i| i.label).collect();
    let majority = common::oracle_majority(&labels);
    assert_eq!(report.majority_label, Some(majority));
    let maj_hits = test.iter().filter(|i| i.label == majority).count();
    assert_eq!(
        report.majority_accuracy,
        maj_hits as f64 / test.len() as f64
    );
    let (mut hits, mut scored) = (0usize, 0usize);
    for inst in test {
        if let Some(p) = common::oracle_last_noun(&sents[inst.sentence_index]) {
            scored += 1;
            hits += usize::from(p == inst.label);
        }
    }
    assert_eq!(report.last_noun_abstained, test.len() - scored);
    assert_eq!(report.last_noun_accuracy, hits as f64 / scored as f64);
}

#[test]
fn intervening_noun_filter_keeps_exactly_sentences_with_nouns() {
    let sents = mixed_heavy_corpus(2_000, 9);
    let kept = filter_intervening_noun(&sents);
    let expected: Vec<_> = sents
        .iter()
        .filter(|s| {
            let (a, b) = (s.subject_index.unwrap(), s.verb_index.unwrap());
            s.pos[a + 1..b].iter().any(|p| p.starts_with("NN"))
        })
        .collect();
    assert_eq!(kept.len(), expected.len());
    assert!(kept.iter().zip(expected).all(|(a, b)| a == b));
    assert!(kept
        .iter()
        .all(|s| count_attractors(s) != Some(AttractorCount::Count(0))));
}

fn attractors() -> impl Strategy<Value = AttractorCount> {
    prop_oneof![
        (0usize..7).prop_map(AttractorCount::Count),
        Just(AttractorCount::Mixed)
    ]
}

fn number() -> impl Strategy<Value = Number> {
    prop_oneof![Just(Number::Sg), Just(Number::Pl)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn combine_weights_sum_to_one(l in -5.0f64..5.0, r in 0.0f64..1e6) {
        let both = combine_losses(l, l, r).unwrap();
        prop_assert!((both - l).abs() <= 1e-12 * (1.0 + l.abs()));
    }

    #[test]
    fn combine_moves_monotonically_towards_second_loss(
        l1 in 0.0f64..5.0, l2 in 0.0f64..5.0, r in 0.0f64..100.0, dr in 0.0f64..100.0,
    ) {
        let a = combine_losses(l1, l2, r).unwrap();
        let b = combine_losses(l1, l2, r + dr).unwrap();
        prop_assert!((b - l2).abs() <= (a - l2).abs() + 1e-12);
        prop_assert!(a >= l1.min(l2) - 1e-12 && a <= l1.max(l2) + 1e-12);
    }

    #[test]
    fn negative_or_nan_ratio_is_rejected(r in -1e6f64..-1e-9) {
        prop_assert!(combine_losses(1.0, 2.0, r).is_err());
        prop_assert!(combine_losses(1.0, 2.0, f64::NAN).is_err());
    }

    #[test]
    fn lexical_probe_is_antisymmetric(seed in 0u64..1000, len in 1usize..8, c in 2usize..20, i in 2usize..20) {
        prop_assume!(c != i);
        let p = common::model(5, 20, 0, &[Head::Lm], seed);
        let mut rng = Rng::new(seed);
        let pre: Vec<usize> = (0..len).map(|_| 2 + rng.below(18)).collect();
        let forward = probe_lexical(&p, &pre, c, i).unwrap();
        let backward = probe_lexical(&p, &pre, i, c).unwrap();
        prop_assert!((forward + backward - 1.0).abs() <= 1e-12);
        prop_assert!(probe_lexical(&p, &pre, c, c).is_err());
    }

    #[test]
    fn buckets_recombine_to_overall(
        rows in proptest::collection::vec((attractors(), number(), number()), 1..200),
    ) {
        let insts: Vec<AgreementInstance> = rows
            .iter()
            .map(|&(a, label, _)| AgreementInstance {
                preamble: vec![2],
                label,
                attractors: a,
                has_intervening_noun: a != AttractorCount::Count(0),
                sentence_index: 0,
            })
            .collect();
        let preds: Vec<Number> = rows.iter().map(|r| r.2).collect();
        let rep = bucket_report(&insts, &preds).unwrap();
        let parts = rep.accuracy_by_attractor.values().chain(rep.mixed_bucket.iter());
        let (hits, n) = parts.fold((0.0, 0), |(h, n), b| (h + b.accuracy * b.n as f64, n + b.n));
        prop_assert_eq!(n, rep.n);
        prop_assert!((hits / n as f64 - rep.overall_accuracy).abs() <= 1e-12);
        let direct = rows.iter().filter(|r| r.1 == r.2).count() as f64 / rows.len() as f64;
        prop_assert!((direct - rep.overall_accuracy).abs() <= 1e-12);
        let counted: Vec<_> = rows.iter().filter(|r| matches!(r.0, AttractorCount::Count(k) if k >= 2)).collect();
        match rep.accuracy_at_least(2) {
            Some(acc) => {
                let direct = counted.iter().filter(|r| r.1 == r.2).count() as f64 / counted.len() as f64;
                prop_assert!((acc - direct).abs() <= 1e-12);
            }
            None => prop_assert!(counted.is_empty()),
        }
    }

    #[test]
    fn padded_batches_equal_unpadded_oracle(seed in 0u64..500, n in 1usize..7, head_ix in 0usize..3) {
        let head = [Head::Agreement, Head::Supertag, Head::Lm][head_ix];
        let p = common::model(4, 15, 5, &[head], seed);
        let mut rng = Rng::new(seed ^ 0x5a);
        let insts = common::random_instances(&mut rng, head, n, 15, 5, 9);
        let refs: Vec<&TaskInstance> = insts.iter().collect();
        let (l, _) = batch_loss(&p, &TaskBatch::from_instances(&refs, 0).unwrap()).unwrap();
        prop_assert!((l - common::naive_mean_loss(&p, &insts)).abs() <= 1e-12);
    }
}
