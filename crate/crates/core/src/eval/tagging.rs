use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::TagInventory;
use crate::error::{Error, Result};
use crate::model::{encode, head_logits, Head, ModelParams, SoftmaxHead};
use crate::numeric::argmax;
use crate::train::{Target, TaskInstance};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaggingReport {
    pub accuracy: f64,
    pub n_tokens: usize,
    /// Accuracy of predicting each word's most frequent training tag.
    pub majority_per_word_accuracy: f64,
}

fn tagged(inst: &TaskInstance) -> Result<&[usize]> {
    match &inst.target {
        Target::Tags(t) => Ok(t),
        _ => Err(Error::Label(
            "tagging evaluation needs per-token tag labels".into(),
        )),
    }
}

/// Most frequent tag per token id (ties to the smaller tag id) and the
/// corpus-wide most frequent tag for unseen tokens.
#[derive(Clone, Debug)]
pub struct MajorityTagger {
    per_word: HashMap<usize, usize>,
    fallback: usize,
}

impl MajorityTagger {
    pub fn fit(train: &[TaskInstance]) -> Result<Self> {
        let mut counts: HashMap<usize, HashMap<usize, usize>> = HashMap::new();
        let mut global: HashMap<usize, usize> = HashMap::new();
        for inst in train {
            for (&w, &t) in inst.tokens.iter().zip(tagged(inst)?) {
                *counts.entry(w).or_default().entry(t).or_default() += 1;
                *global.entry(t).or_default() += 1;
            }
        }
        let best = |m: &HashMap<usize, usize>| {
            m.iter()
                .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
                .map(|(t, _)| *t)
                .unwrap_or(0)
        };
        Ok(MajorityTagger {
            per_word: counts.iter().map(|(w, m)| (*w, best(m))).collect(),
            fallback: best(&global),
        })
    }

    pub fn predict(&self, token: usize) -> usize {
        self.per_word.get(&token).copied().unwrap_or(self.fallback)
    }
}

/// Per-token accuracy over every position, dummy-class tokens included.
pub fn eval_supertag(
    params: &ModelParams,
    train: &[TaskInstance],
    test: &[TaskInstance],
    inventory: &TagInventory,
) -> Result<TaggingReport> {
    let head = params
        .head(Head::Supertag)
        .ok_or_else(|| Error::Config("model has no supertag head".into()))?;
    if head.outputs() != inventory.n_classes() {
        return Err(Error::Config(format!(
            "supertag head has {} classes, inventory has {}",
            head.outputs(),
            inventory.n_classes()
        )));
    }
    let majority = MajorityTagger::fit(train)?;
    let parts: Vec<Result<(usize, usize, usize)>> = test
        .par_iter()
        .map(|inst| {
            let tags = tagged(inst)?;
            let trace = encode(params, &inst.tokens)?;
            let (mut ok, mut base) = (0, 0);
            for (t, &y) in tags.iter().enumerate() {
                let z = head_logits(params, trace.h(t), SoftmaxHead::Supertag)?;
                ok += usize::from(argmax(&z) == y);
                base += usize::from(majority.predict(inst.tokens[t]) == y);
            }
            Ok((ok, base, tags.len()))
        })
        .collect();
    let (mut ok, mut base, mut n) = (0, 0, 0);
    for p in parts {
        let (a, b, c) = p?;
        ok += a;
        base += b;
        n += c;
    }
    let frac = |x: usize| if n == 0 { 0.0 } else { x as f64 / n as f64 };
    Ok(TaggingReport {
        accuracy: frac(ok),
        n_tokens: n,
        majority_per_word_accuracy: frac(base),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelConfig, ModelParams};

    #[test]
    fn dummy_predictions_score_dummy_fraction() {
        let inv = TagInventory::build(["A", "A", "B"].iter().copied(), 1);
        let c = ModelConfig::new(2, 8, inv.n_classes(), &[Head::Supertag]).unwrap();
        let mut p = ModelParams::zeros(&c);
        // bias towards class 0, the dummy
        p.supertag.as_mut().unwrap().bias.set(0, 0, 5.0);
        let test = vec![
            TaskInstance::tagging(vec![2, 3, 4], vec![0, 1, 2]).unwrap(),
            TaskInstance::tagging(vec![5], vec![0]).unwrap(),
        ];
        let r = eval_supertag(&p, &test, &test, &inv).unwrap();
        assert_eq!(r.n_tokens, 4);
        assert_eq!(r.accuracy, 0.5);
        assert_eq!(r.majority_per_word_accuracy, 1.0);
    }

    #[test]
    fn inventory_mismatch_is_configuration_error() {
        let inv = TagInventory::build(["A"].iter().copied(), 1);
        let c = ModelConfig::new(2, 8, 7, &[Head::Supertag]).unwrap();
        let p = ModelParams::zeros(&c);
        let t = vec![TaskInstance::tagging(vec![2], vec![0]).unwrap()];
        assert!(matches!(
            eval_supertag(&p, &t, &t, &inv),
            Err(Error::Config(_))
        ));
    }
}
