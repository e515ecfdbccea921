use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::sentence::Sentence;

/// Penn Treebank tag set, each of which is also a fallback vocabulary entry.
pub const PENN_TAGS: [&str; 46] = [
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP", "NNPS",
    "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB", "VBD", "VBG",
    "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB", "#", "$", ".", ",", ":", "``", "''", "-LRB-",
    "-RRB-", "HYPH",
];

pub const PAD: &str = "<pad>";
pub const EOS: &str = "<eos>";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum VocabRule {
    /// The `k` most frequent words.
    TopK(usize),
    /// Words occurring at least `c` times.
    MinCount(usize),
}

/// Token ids: `0` padding, `1` end of sentence, then one id per Penn tag,
/// then retained words by descending frequency (ties lexicographic).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    rule: VocabRule,
    words: Vec<String>,
    word_ids: HashMap<String, usize>,
    tag_ids: HashMap<&'static str, usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VocabFile {
    rule: VocabRule,
    words: Vec<String>,
    sha256: String,
}

const FIRST_TAG: usize = 2;
const FIRST_WORD: usize = FIRST_TAG + PENN_TAGS.len();

impl Vocab {
    fn from_words(rule: VocabRule, words: Vec<String>) -> Self {
        let word_ids = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), FIRST_WORD + i))
            .collect();
        let tag_ids = PENN_TAGS
            .iter()
            .enumerate()
            .map(|(i, &t)| (t, FIRST_TAG + i))
            .collect();
        Vocab {
            rule,
            words,
            word_ids,
            tag_ids,
        }
    }

    pub fn len(&self) -> usize {
        FIRST_WORD + self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn rule(&self) -> VocabRule {
        self.rule
    }

    pub fn pad_id(&self) -> usize {
        0
    }

    pub fn eos_id(&self) -> usize {
        1
    }

    pub fn word_id(&self, word: &str) -> Option<usize> {
        self.word_ids.get(word).copied()
    }

    pub fn tag_id(&self, tag: &str) -> Option<usize> {
        self.tag_ids.get(tag).copied()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Id of `word`, or of its POS fallback when the word is not retained.
    pub fn lookup(&self, word: &str, pos: &str) -> Result<usize> {
        if let Some(id) = self.word_id(word) {
            return Ok(id);
        }
        self.tag_id(pos)
            .ok_or_else(|| Error::Annotation(format!("unknown POS tag `{pos}` for word `{word}`")))
    }

    pub fn token(&self, id: usize) -> &str {
        match id {
            0 => PAD,
            1 => EOS,
            i if i < FIRST_WORD => PENN_TAGS[i - FIRST_TAG],
            i => &self.words[i - FIRST_WORD],
        }
    }

    pub fn sha256(&self) -> String {
        let mut h = Sha256::new();
        h.update(
            serde_json::to_string(&self.rule)
                .unwrap_or_default()
                .as_bytes(),
        );
        for w in &self.words {
            h.update(w.as_bytes());
            h.update([0u8]);
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        let f = VocabFile {
            rule: self.rule,
            words: self.words.clone(),
            sha256: self.sha256(),
        };
        Ok(serde_json::to_string_pretty(&f)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: VocabFile = serde_json::from_str(text)?;
        let v = Vocab::from_words(f.rule, f.words);
        if v.sha256() != f.sha256 {
            return Err(Error::Compatibility(
                "vocabulary file hash does not match its contents".into(),
            ));
        }
        Ok(v)
    }
}

pub fn build_vocab(sentences: &[Sentence], rule: VocabRule) -> Vocab {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for s in sentences {
        for w in &s.tokens {
            *counts.entry(w.as_str()).or_default() += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let keep: Vec<String> = match rule {
        VocabRule::TopK(k) => ranked.iter().take(k).map(|(w, _)| w.to_string()).collect(),
        VocabRule::MinCount(c) => ranked
            .iter()
            .filter(|(_, n)| *n >= c)
            .map(|(w, _)| w.to_string())
            .collect(),
    };
    Vocab::from_words(rule, keep)
}

/// Token ids with out-of-vocabulary words replaced by their POS fallback.
pub fn replace_rare(sentence: &Sentence, vocab: &Vocab) -> Result<Vec<usize>> {
    sentence
        .tokens
        .iter()
        .zip(&sentence.pos)
        .map(|(w, p)| vocab.lookup(w, p))
        .collect()
}
