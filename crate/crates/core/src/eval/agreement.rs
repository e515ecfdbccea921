use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{noun_number, AgreementInstance, AttractorCount, Number, Sentence};
use crate::error::{Error, Result};
use crate::model::{encode, head_agreement, ModelParams};

/// Reporting buckets for attractor counts, in display order.
pub const ATTRACTOR_BUCKETS: [&str; 5] = ["0", "1", "2", "3", "4+"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BucketStat {
    pub accuracy: f64,
    pub n: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub overall_accuracy: f64,
    pub n: usize,
    /// Present buckets among `0`, `1`, `2`, `3`, `4+`.
    pub accuracy_by_attractor: BTreeMap<String, BucketStat>,
    pub mixed_bucket: Option<BucketStat>,
}

impl AgreementReport {
    /// Accuracy pooled over buckets with at least `k` attractors.
    pub fn accuracy_at_least(&self, k: usize) -> Option<f64> {
        let (mut correct, mut n) = (0.0, 0usize);
        for (i, b) in ATTRACTOR_BUCKETS.iter().enumerate().skip(k) {
            if let Some(s) = self.accuracy_by_attractor.get(*b) {
                correct += s.accuracy * s.n as f64;
                n += s.n;
            }
            debug_assert!(i >= k);
        }
        (n > 0).then(|| correct / n as f64)
    }

    pub fn bucket_accuracy(&self, bucket: &str) -> Option<f64> {
        self.accuracy_by_attractor.get(bucket).map(|b| b.accuracy)
    }
}

/// Scores predictions against instance labels, overall and per attractor bucket.
/// MIXED instances count towards the overall accuracy and their own bucket only.
pub fn bucket_report(
    instances: &[AgreementInstance],
    predictions: &[Number],
) -> Result<AgreementReport> {
    if instances.len() != predictions.len() {
        return Err(Error::Shape(format!(
            "{} instances but {} predictions",
            instances.len(),
            predictions.len()
        )));
    }
    let mut counts: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut mixed = (0usize, 0usize);
    let mut correct = 0usize;
    for (inst, &pred) in instances.iter().zip(predictions) {
        let ok = usize::from(pred == inst.label);
        correct += ok;
        let slot = match inst.attractors {
            AttractorCount::Mixed => &mut mixed,
            c => counts.entry(c.bucket()).or_default(),
        };
        slot.0 += ok;
        slot.1 += 1;
    }
    let stat = |(c, n): (usize, usize)| BucketStat {
        accuracy: c as f64 / n as f64,
        n,
    };
    Ok(AgreementReport {
        overall_accuracy: if instances.is_empty() {
            0.0
        } else {
            correct as f64 / instances.len() as f64
        },
        n: instances.len(),
        accuracy_by_attractor: counts.into_iter().map(|(k, v)| (k, stat(v))).collect(),
        mixed_bucket: (mixed.1 > 0).then(|| stat(mixed)),
    })
}

/// Plural probability after reading `preamble`.
pub fn predict_plural(params: &ModelParams, preamble: &[usize]) -> Result<f64> {
    let trace = encode(params, preamble)?;
    head_agreement(params, trace.last_h())
}

pub fn predict_agreement(
    params: &ModelParams,
    instances: &[AgreementInstance],
) -> Result<Vec<Number>> {
    instances
        .par_iter()
        .map(|i| predict_plural(params, &i.preamble).map(Number::from_p_plural))
        .collect()
}

/// Agreement-head accuracy with a `p_plural >= 0.5 → PL` decision rule.
pub fn eval_agreement(
    params: &ModelParams,
    instances: &[AgreementInstance],
) -> Result<AgreementReport> {
    bucket_report(instances, &predict_agreement(params, instances)?)
}

/// Number of the nearest noun before the verb; `None` when no noun precedes it.
pub fn baseline_last_noun(sentence: &Sentence) -> Option<Number> {
    let v = sentence.verb_index?;
    sentence.pos[..v].iter().rev().find_map(|p| noun_number(p))
}

/// Majority training label; an exact tie resolves to singular.
pub fn baseline_majority(train: &[AgreementInstance]) -> Result<Number> {
    if train.is_empty() {
        return Err(Error::EmptyBatch(
            "majority baseline needs training instances".into(),
        ));
    }
    let pl = train.iter().filter(|i| i.label == Number::Pl).count();
    Ok(if 2 * pl > train.len() {
        Number::Pl
    } else {
        Number::Sg
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub majority_label: Option<Number>,
    pub majority_accuracy: f64,
    /// Accuracy over instances where the last-noun heuristic does not abstain.
    pub last_noun_accuracy: f64,
    pub last_noun_abstained: usize,
}

/// Both baselines on `test`; `sentences` are the sources indexed by
/// `AgreementInstance::sentence_index`.
pub fn eval_baselines(
    train: &[AgreementInstance],
    test: &[AgreementInstance],
    sentences: &[Sentence],
) -> Result<BaselineReport> {
    let majority = baseline_majority(train)?;
    let n = test.len().max(1) as f64;
    let majority_accuracy = test.iter().filter(|i| i.label == majority).count() as f64 / n;
    let (mut correct, mut scored, mut abstained) = (0usize, 0usize, 0usize);
    for inst in test {
        let s = sentences.get(inst.sentence_index).ok_or_else(|| {
            Error::Shape(format!("no sentence {} for instance", inst.sentence_index))
        })?;
        match baseline_last_noun(s) {
            Some(p) => {
                scored += 1;
                correct += usize::from(p == inst.label);
            }
            None => abstained += 1,
        }
    }
    Ok(BaselineReport {
        majority_label: Some(majority),
        majority_accuracy,
        last_noun_accuracy: if scored == 0 {
            0.0
        } else {
            correct as f64 / scored as f64
        },
        last_noun_abstained: abstained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(label: Number, attractors: AttractorCount) -> AgreementInstance {
        AgreementInstance {
            preamble: vec![2],
            label,
            attractors,
            has_intervening_noun: attractors != AttractorCount::Count(0),
            sentence_index: 0,
        }
    }

    #[test]
    fn perfect_predictor_fills_every_bucket_with_ones() {
        let v: Vec<AgreementInstance> = (0..12)
            .map(|i| {
                let a = if i % 6 == 5 {
                    AttractorCount::Mixed
                } else {
                    AttractorCount::Count(i % 6)
                };
                inst(if i % 2 == 0 { Number::Sg } else { Number::Pl }, a)
            })
            .collect();
        let preds: Vec<Number> = v.iter().map(|i| i.label).collect();
        let r = bucket_report(&v, &preds).unwrap();
        assert_eq!(r.overall_accuracy, 1.0);
        assert!(r.accuracy_by_attractor.values().all(|b| b.accuracy == 1.0));
        assert_eq!(r.accuracy_by_attractor["4+"].n, 2);
        let total: usize = r.accuracy_by_attractor.values().map(|b| b.n).sum::<usize>()
            + r.mixed_bucket.unwrap().n;
        assert_eq!(total, v.len());
    }

    #[test]
    fn constant_singular_scores_singular_fraction() {
        let v = vec![
            inst(Number::Sg, AttractorCount::Count(1)),
            inst(Number::Pl, AttractorCount::Count(1)),
            inst(Number::Pl, AttractorCount::Count(1)),
            inst(Number::Sg, AttractorCount::Count(0)),
        ];
        let r = bucket_report(&v, &[Number::Sg; 4]).unwrap();
        assert!((r.accuracy_by_attractor["1"].accuracy - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.accuracy_by_attractor["0"].accuracy, 1.0);
        assert_eq!(r.overall_accuracy, 0.5);
    }

    #[test]
    fn majority_ties_to_singular() {
        let v = vec![
            inst(Number::Sg, AttractorCount::Count(0)),
            inst(Number::Pl, AttractorCount::Count(0)),
        ];
        assert_eq!(baseline_majority(&v).unwrap(), Number::Sg);
        let v = vec![
            inst(Number::Sg, AttractorCount::Count(0)),
            inst(Number::Sg, AttractorCount::Count(0)),
            inst(Number::Sg, AttractorCount::Count(0)),
            inst(Number::Pl, AttractorCount::Count(0)),
        ];
        assert_eq!(baseline_majority(&v).unwrap(), Number::Sg);
        assert!(baseline_majority(&[]).is_err());
    }

    #[test]
    fn last_noun_on_attractor_sentence() {
        let s = Sentence {
            tokens: "The number of men is"
                .split(' ')
                .map(String::from)
                .collect(),
            pos: "DT NN IN NNS VBZ".split(' ').map(String::from).collect(),
            supertags: None,
            subject_index: Some(1),
            verb_index: Some(4),
            verb_number: Some(Number::Sg),
        };
        assert_eq!(baseline_last_noun(&s), Some(Number::Pl));
        let s = Sentence {
            tokens: "The dog runs".split(' ').map(String::from).collect(),
            pos: "DT NN VBZ".split(' ').map(String::from).collect(),
            supertags: None,
            subject_index: Some(1),
            verb_index: Some(2),
            verb_number: Some(Number::Sg),
        };
        assert_eq!(baseline_last_noun(&s), Some(Number::Sg));
        let s = Sentence {
            tokens: vec!["They".into(), "run".into()],
            pos: vec!["PRP".into(), "VBP".into()],
            supertags: None,
            subject_index: Some(0),
            verb_index: Some(1),
            verb_number: Some(Number::Pl),
        };
        assert_eq!(baseline_last_noun(&s), None);
    }
}
