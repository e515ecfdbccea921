use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{AgreementInstance, Number, Sentence, VerbPair, Vocab};
use crate::error::{Error, Result};
use crate::model::{encode, head_logits, ModelParams, SoftmaxHead};
use crate::numeric::{log_sum_exp, sigmoid};
use crate::train::{Target, TaskInstance};

use super::agreement::{bucket_report, predict_agreement, AgreementReport};

/// Token-averaged next-word negative log2-likelihood.
pub fn lm_bits(params: &ModelParams, instances: &[TaskInstance]) -> Result<f64> {
    let parts: Vec<Result<(f64, usize)>> = instances
        .par_iter()
        .map(|inst| {
            let Target::NextTokens(next) = &inst.target else {
                return Err(Error::Label("perplexity needs next-token targets".into()));
            };
            let trace = encode(params, &inst.tokens)?;
            let mut nats = 0.0;
            for (t, &y) in next.iter().enumerate() {
                let z = head_logits(params, trace.h(t), SoftmaxHead::Lm)?;
                if y >= z.len() {
                    return Err(Error::Label(format!("target {y} outside the vocabulary")));
                }
                nats += log_sum_exp(&z) - z[y];
            }
            Ok((nats, next.len()))
        })
        .collect();
    let (mut nats, mut n) = (0.0, 0usize);
    for p in parts {
        let (a, b) = p?;
        nats += a;
        n += b;
    }
    if n == 0 {
        return Err(Error::EmptyBatch("perplexity over an empty set".into()));
    }
    Ok(nats / n as f64 / std::f64::consts::LN_2)
}

/// `2^bits` with `bits` the token-averaged negative log2-likelihood.
pub fn eval_perplexity(params: &ModelParams, instances: &[TaskInstance]) -> Result<f64> {
    Ok(lm_bits(params, instances)?.exp2())
}

fn last_logits(params: &ModelParams, preamble: &[usize]) -> Result<Vec<f64>> {
    let trace = encode(params, preamble)?;
    head_logits(params, trace.last_h(), SoftmaxHead::Lm)
}

/// `p(correct) / (p(correct) + p(incorrect))` for the word after `preamble`,
/// evaluated as `sigmoid(z_correct - z_incorrect)`.
pub fn probe_lexical(
    params: &ModelParams,
    preamble: &[usize],
    correct: usize,
    incorrect: usize,
) -> Result<f64> {
    if correct == incorrect {
        return Err(Error::UndefinedProbe(format!(
            "both verb forms map to token id {correct}"
        )));
    }
    let z = last_logits(params, preamble)?;
    let k = z.len();
    if correct >= k || incorrect >= k {
        return Err(Error::Vocabulary {
            id: correct.max(incorrect),
            position: preamble.len(),
            vocab_size: k,
        });
    }
    Ok(sigmoid(z[correct] - z[incorrect]))
}

/// Same ratio over the VBZ/VBP fallback tokens; VBP is correct for plural subjects.
pub fn probe_pos(
    params: &ModelParams,
    preamble: &[usize],
    subject: Number,
    vocab: &Vocab,
) -> Result<f64> {
    let id = |t: &str| {
        vocab
            .tag_id(t)
            .ok_or_else(|| Error::Annotation(format!("vocabulary lacks the {t} fallback")))
    };
    let correct = id(subject.verb_tag())?;
    let incorrect = id(subject.opposite().verb_tag())?;
    probe_lexical(params, preamble, correct, incorrect)
}

/// Token ids of the form agreeing with `number` and of the other form.
pub fn resolve_pair(vocab: &Vocab, pair: &VerbPair, number: Number) -> Result<(usize, usize)> {
    let id = |n: Number| vocab.lookup(pair.form(n), n.verb_tag());
    Ok((id(number)?, id(number.opposite())?))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub lexical: AgreementReport,
    pub pos: AgreementReport,
    /// Agreement-head accuracy on exactly the preambles the probes scored.
    pub agreement_head: Option<AgreementReport>,
    /// Instances whose verb has no known pair or whose forms share an id.
    pub undefined: usize,
}

/// Runs both probes on every instance whose verb belongs to one of `pairs`.
pub fn eval_probes(
    params: &ModelParams,
    instances: &[AgreementInstance],
    sentences: &[Sentence],
    vocab: &Vocab,
    pairs: &[VerbPair],
) -> Result<ProbeReport> {
    let mut kept = Vec::new();
    let mut resolved = Vec::new();
    let mut undefined = 0;
    for inst in instances {
        let s = sentences.get(inst.sentence_index).ok_or_else(|| {
            Error::Shape(format!("no sentence {} for instance", inst.sentence_index))
        })?;
        let verb = s.verb_index.map(|v| s.tokens[v].as_str()).unwrap_or("");
        let Some(pair) = pairs
            .iter()
            .find(|p| p.singular == verb || p.plural == verb)
        else {
            undefined += 1;
            continue;
        };
        let (c, i) = resolve_pair(vocab, pair, inst.label)?;
        if c == i {
            undefined += 1;
            continue;
        }
        kept.push(inst.clone());
        resolved.push((c, i));
    }
    let as_number = |inst: &AgreementInstance, p: f64| {
        if p >= 0.5 {
            inst.label
        } else {
            inst.label.opposite()
        }
    };
    let lexical: Vec<Number> = kept
        .par_iter()
        .zip(&resolved)
        .map(|(inst, &(c, i))| {
            Ok(as_number(
                inst,
                probe_lexical(params, &inst.preamble, c, i)?,
            ))
        })
        .collect::<Result<_>>()?;
    let pos: Vec<Number> = kept
        .par_iter()
        .map(|inst| {
            Ok(as_number(
                inst,
                probe_pos(params, &inst.preamble, inst.label, vocab)?,
            ))
        })
        .collect::<Result<_>>()?;
    let agreement_head = match params.agreement {
        Some(_) => Some(bucket_report(&kept, &predict_agreement(params, &kept)?)?),
        None => None,
    };
    Ok(ProbeReport {
        lexical: bucket_report(&kept, &lexical)?,
        pos: bucket_report(&kept, &pos)?,
        agreement_head,
        undefined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{build_vocab, VocabRule};
    use crate::model::{init_params, Head, ModelConfig};

    fn model(v: usize) -> ModelParams {
        let c = ModelConfig::new(4, v, 0, &[Head::Lm]).unwrap();
        init_params(&c, 3).unwrap()
    }

    #[test]
    fn uniform_model_perplexity_is_vocab_size() {
        let c = ModelConfig::new(3, 17, 0, &[Head::Lm]).unwrap();
        let p = ModelParams::zeros(&c);
        let inst = vec![
            TaskInstance::lm(vec![2, 3, 4], 1),
            TaskInstance::lm(vec![5], 1),
        ];
        assert!((eval_perplexity(&p, &inst).unwrap() - 17.0).abs() < 1e-9);
    }

    #[test]
    fn probe_is_antisymmetric_and_half_for_equal_logits() {
        let p = model(20);
        let pre = [3, 4, 5];
        let a = probe_lexical(&p, &pre, 7, 9).unwrap();
        let b = probe_lexical(&p, &pre, 9, 7).unwrap();
        assert!((a + b - 1.0).abs() < 1e-15);
        let mut q = p.clone();
        let lm = q.lm.as_mut().unwrap();
        for r in 0..4 {
            let w = lm.weight.get(r, 7);
            lm.weight.set(r, 9, w);
        }
        let b7 = lm.bias.get(0, 7);
        lm.bias.set(0, 9, b7);
        assert_eq!(probe_lexical(&q, &pre, 7, 9).unwrap(), 0.5);
        assert!(matches!(
            probe_lexical(&p, &pre, 7, 7),
            Err(Error::UndefinedProbe(_))
        ));
    }

    #[test]
    fn pos_probe_uses_present_tense_fallbacks() {
        let vocab = build_vocab(&[], VocabRule::MinCount(1));
        let p = model(vocab.len());
        let pre = [30, 31];
        let pl = probe_pos(&p, &pre, Number::Pl, &vocab).unwrap();
        let sg = probe_pos(&p, &pre, Number::Sg, &vocab).unwrap();
        assert!((pl + sg - 1.0).abs() < 1e-15);
        let vbp = vocab.tag_id("VBP").unwrap();
        let vbz = vocab.tag_id("VBZ").unwrap();
        assert_eq!(pl, probe_lexical(&p, &pre, vbp, vbz).unwrap());
    }

    #[test]
    fn oov_pair_with_shared_fallback_is_undefined() {
        let vocab = build_vocab(&[], VocabRule::MinCount(1));
        let pair = VerbPair {
            singular: "is".into(),
            plural: "are".into(),
        };
        let (c, i) = resolve_pair(&vocab, &pair, Number::Pl).unwrap();
        assert_eq!(c, vocab.tag_id("VBP").unwrap());
        assert_eq!(i, vocab.tag_id("VBZ").unwrap());
    }
}
