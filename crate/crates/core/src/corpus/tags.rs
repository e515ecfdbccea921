use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::sentence::Sentence;

/// Tag used for both VBZ and VBP once number is removed.
pub const MERGED_PRESENT_TAG: &str = "VBPRES";

pub const DUMMY_TAG: &str = "<dummy>";

/// Removes grammatical number from a Penn tag.
pub fn strip_pos_number(tag: &str) -> &str {
    match tag {
        "NNS" => "NN",
        "NNPS" => "NNP",
        "VBZ" | "VBP" => MERGED_PRESENT_TAG,
        other => other,
    }
}

/// Tag-to-class map frozen from training data. Class 0 is the dummy tag
/// that absorbs rare and unseen tags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagInventory {
    pub min_count: usize,
    /// Retained tags; class id of `tags[i]` is `i + 1`.
    pub tags: Vec<String>,
    /// Fraction of training tokens mapped to the dummy class.
    pub dummy_fraction: f64,
    #[serde(skip)]
    ids: HashMap<String, usize>,
}

impl TagInventory {
    pub fn build<'a>(tags: impl IntoIterator<Item = &'a str>, min_count: usize) -> Self {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut total = 0usize;
        for t in tags {
            *counts.entry(t).or_default() += 1;
            total += 1;
        }
        let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        let kept: Vec<(&str, usize)> = ranked
            .into_iter()
            .filter(|(_, n)| *n >= min_count)
            .collect();
        let kept_tokens: usize = kept.iter().map(|(_, n)| n).sum();
        let dummy_fraction = if total == 0 {
            0.0
        } else {
            (total - kept_tokens) as f64 / total as f64
        };
        let mut inv = TagInventory {
            min_count,
            tags: kept.into_iter().map(|(t, _)| t.to_string()).collect(),
            dummy_fraction,
            ids: HashMap::new(),
        };
        inv.reindex();
        inv
    }

    fn reindex(&mut self) {
        self.ids = self
            .tags
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i + 1))
            .collect();
    }

    pub fn dummy_id(&self) -> usize {
        0
    }

    /// Number of output classes including the dummy.
    pub fn n_classes(&self) -> usize {
        self.tags.len() + 1
    }

    pub fn id(&self, tag: &str) -> usize {
        self.ids.get(tag).copied().unwrap_or(0)
    }

    pub fn name(&self, id: usize) -> &str {
        if id == 0 {
            DUMMY_TAG
        } else {
            &self.tags[id - 1]
        }
    }

    pub fn encode(&self, tags: &[String]) -> Vec<usize> {
        tags.iter().map(|t| self.id(t)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut inv: TagInventory = serde_json::from_str(text)?;
        inv.reindex();
        Ok(inv)
    }
}

/// Supertag inventory keeping tags seen at least `min_count` times in
/// the given (training) sentences.
pub fn prune_supertags(sentences: &[Sentence], min_count: usize) -> Result<TagInventory> {
    if sentences.iter().any(|s| s.supertags.is_none()) {
        return Err(Error::Annotation(
            "supertag inventory needs supertags on every sentence".into(),
        ));
    }
    Ok(TagInventory::build(
        sentences
            .iter()
            .flat_map(|s| s.supertags.iter().flatten().map(String::as_str)),
        min_count,
    ))
}

/// Inventory over number-stripped POS tags.
pub fn pos_inventory(sentences: &[Sentence], min_count: usize) -> TagInventory {
    TagInventory::build(
        sentences
            .iter()
            .flat_map(|s| s.pos.iter().map(|p| strip_pos_number(p))),
        min_count,
    )
}
