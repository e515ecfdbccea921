use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::jsonl::Diagnostic;
use super::sentence::{noun_number, Number, Sentence};
use super::vocab::{replace_rare, Vocab};

/// Attractor statistic of an agreement dependency. `Mixed` marks sentences
/// whose intervening nouns are not all of the opposite number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttractorCount {
    Count(usize),
    Mixed,
}

impl AttractorCount {
    /// Reporting bucket: `0`..`3`, `4+` or `MIXED`.
    pub fn bucket(self) -> String {
        match self {
            AttractorCount::Count(n) if n >= 4 => "4+".into(),
            AttractorCount::Count(n) => n.to_string(),
            AttractorCount::Mixed => "MIXED".into(),
        }
    }

    pub fn count(self) -> Option<usize> {
        match self {
            AttractorCount::Count(n) => Some(n),
            AttractorCount::Mixed => None,
        }
    }
}

impl fmt::Display for AttractorCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttractorCount::Count(n) => write!(f, "{n}"),
            AttractorCount::Mixed => f.write_str("MIXED"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AgreementInstance {
    /// Token ids of the words before the verb.
    pub preamble: Vec<usize>,
    pub label: Number,
    pub attractors: AttractorCount,
    pub has_intervening_noun: bool,
    /// Position of the source sentence in the corpus it was extracted from.
    pub sentence_index: usize,
}

/// Numbers of the nouns strictly between subject and verb.
pub fn intervening_nouns(sentence: &Sentence) -> Option<Vec<Number>> {
    let (s, v) = (sentence.subject_index?, sentence.verb_index?);
    Some(
        sentence.pos[s + 1..v]
            .iter()
            .filter_map(|p| noun_number(p))
            .collect(),
    )
}

pub fn count_attractors(sentence: &Sentence) -> Option<AttractorCount> {
    let nouns = intervening_nouns(sentence)?;
    let subject = sentence.subject_number()?;
    if nouns.iter().all(|&n| n == subject.opposite()) {
        Some(AttractorCount::Count(nouns.len()))
    } else {
        Some(AttractorCount::Mixed)
    }
}

pub fn extract_agreement(sentence: &Sentence, vocab: &Vocab) -> Result<AgreementInstance> {
    let (Some(_), Some(v), Some(label)) = (
        sentence.subject_index,
        sentence.verb_index,
        sentence.verb_number,
    ) else {
        return Err(Error::Annotation(
            "sentence lacks subject/verb annotation".into(),
        ));
    };
    let ids = replace_rare(sentence, vocab)?;
    let attractors = count_attractors(sentence)
        .ok_or_else(|| Error::Annotation("cannot determine subject number".into()))?;
    Ok(AgreementInstance {
        preamble: ids[..v].to_vec(),
        label,
        attractors,
        has_intervening_noun: intervening_nouns(sentence).is_some_and(|n| !n.is_empty()),
        sentence_index: 0,
    })
}

/// Extracts instances from a corpus, skipping unannotated sentences.
/// Diagnostics use 1-based sentence positions.
pub fn extract_all(
    sentences: &[Sentence],
    vocab: &Vocab,
) -> (Vec<AgreementInstance>, Vec<Diagnostic>) {
    let mut out = Vec::new();
    let mut diags = Vec::new();
    for (i, s) in sentences.iter().enumerate() {
        match extract_agreement(s, vocab) {
            Ok(mut inst) => {
                inst.sentence_index = i;
                out.push(inst);
            }
            Err(e) => diags.push(Diagnostic {
                line: i + 1,
                message: e.to_string(),
            }),
        }
    }
    (out, diags)
}

/// Sentences with at least one noun of any number between subject and verb.
pub fn filter_intervening_noun(sentences: &[Sentence]) -> Vec<Sentence> {
    sentences
        .iter()
        .filter(|s| intervening_nouns(s).is_some_and(|n| !n.is_empty()))
        .cloned()
        .collect()
}
