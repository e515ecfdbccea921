mod common;

use agreelab::corpus::Number;
use agreelab::model::Head;
use agreelab::numeric::{grad_check, FlatParams, GradCheckReport, Rng};
use agreelab::train::{batch_loss, Target, TaskBatch, TaskInstance};
use common::Dd;

fn check(p: &agreelab::model::ModelParams, insts: &[TaskInstance]) -> GradCheckReport {
    let refs: Vec<&TaskInstance> = insts.iter().collect();
    let batch = TaskBatch::from_instances(&refs, 0).unwrap();
    let (_, grads) = batch_loss(p, &batch).unwrap();
    let reference = common::naive_mean_loss_in::<Dd>(p, insts);
    grad_check(
        p,
        |q| common::precise_shifted_loss(q, insts, reference),
        &grads,
        1e-5,
    )
    .unwrap()
}

#[test]
fn double_double_identities() {
    let third = Dd::ONE / Dd::from(3.0);
    assert!((third * Dd::from(3.0) - Dd::ONE).to_f64().abs() < 1e-31);
    for x in [-9.5, -2.2, 1e-7, 0.3, 1.7, 4.0] {
        let (a, b) = (Dd::from(x), Dd::from(0.1234567));
        // Ten squarings in `exp` amplify double-double rounding by 2^10.
        let split = (a + b).exp() / (a.exp() * b.exp()) - Dd::ONE;
        assert!(split.to_f64().abs() < 1e-27, "{x}: {split:?}");
        assert!((a.exp().ln() - a).to_f64().abs() < 1e-27, "{x}");
        assert_eq!(a.exp().to_f64(), x.exp());
        assert!((a.tanh().to_f64() - x.tanh()).abs() <= 2.0 * f64::EPSILON);
        assert!((a.sigmoid().to_f64() - agreelab::numeric::sigmoid(x)).abs() <= 2.0 * f64::EPSILON);
    }
}

#[test]
fn library_loss_matches_precise_oracle() {
    let mut rng = Rng::new(4);
    for head in [Head::Agreement, Head::Supertag, Head::Lm] {
        let mut p = common::model(8, 40, 9, &[head], 2);
        common::jitter(&mut p, 3, 0.3);
        let insts = common::random_instances(&mut rng, head, 6, 40, 9, 8);
        let refs: Vec<&TaskInstance> = insts.iter().collect();
        let (l, _) = batch_loss(&p, &TaskBatch::from_instances(&refs, 0).unwrap()).unwrap();
        let precise = common::naive_mean_loss_in::<Dd>(&p, &insts).to_f64();
        assert!((l - precise).abs() < 1e-13, "{head}: {l} vs {precise}");
    }
}

#[test]
fn agreement_three_word_sentence() {
    let p = common::model(8, 20, 0, &[Head::Agreement], 9);
    let inst = TaskInstance {
        tokens: vec![4, 11, 7],
        target: Target::Number(Number::Pl),
    };
    let r = check(&p, &[inst]);
    assert!(r.passes(1e-4), "{r:?}");
    assert_eq!(r.checked, p.flat_len());
}

#[test]
fn lm_head_vocab_twenty() {
    let mut rng = Rng::new(21);
    let p = common::model(8, 20, 0, &[Head::Lm], 5);
    let insts = common::random_instances(&mut rng, Head::Lm, 3, 20, 0, 7);
    let r = check(&p, &insts);
    assert!(r.passes(1e-4), "{r:?}");
}

#[test]
fn supertag_head_with_jitter_and_long_sequences() {
    let mut rng = Rng::new(8);
    let mut p = common::model(6, 30, 10, &[Head::Supertag], 1);
    common::jitter(&mut p, 2, 0.5);
    let insts = common::random_instances(&mut rng, Head::Supertag, 3, 30, 10, 12);
    let r = check(&p, &insts);
    assert!(r.passes(1e-4), "{r:?}");
}

#[test]
fn unused_embedding_rows_get_exactly_zero_gradient() {
    let p = common::model(4, 12, 0, &[Head::Agreement], 3);
    let inst = TaskInstance {
        tokens: vec![2, 3],
        target: Target::Number(Number::Sg),
    };
    let batch = TaskBatch::from_instances(&[&inst], 0).unwrap();
    let (_, g) = batch_loss(&p, &batch).unwrap();
    for row in (0..12).filter(|r| ![2, 3].contains(r)) {
        for k in 0..4 {
            assert_eq!(g.embedding.get(row, k), 0.0);
        }
    }
    assert!((0..4).any(|k| g.embedding.get(2, k) != 0.0));
}
