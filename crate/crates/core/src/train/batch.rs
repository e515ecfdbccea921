use serde::{Deserialize, Serialize};

use crate::corpus::{AgreementInstance, Number};
use crate::error::{Error, Result};
use crate::model::Head;
use crate::numeric::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Agreement,
    /// Per-token classification; also used for number-stripped POS tags.
    Supertag,
    Lm,
}

impl Task {
    pub fn head(self) -> Head {
        match self {
            Task::Agreement => Head::Agreement,
            Task::Supertag => Head::Supertag,
            Task::Lm => Head::Lm,
        }
    }

    pub fn name(self) -> &'static str {
        self.head().name()
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Target {
    Number(Number),
    Tags(Vec<usize>),
    NextTokens(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaskInstance {
    pub tokens: Vec<usize>,
    pub target: Target,
}

impl TaskInstance {
    pub fn agreement(inst: &AgreementInstance) -> Self {
        TaskInstance {
            tokens: inst.preamble.clone(),
            target: Target::Number(inst.label),
        }
    }

    pub fn tagging(tokens: Vec<usize>, tags: Vec<usize>) -> Result<Self> {
        if tokens.len() != tags.len() {
            return Err(Error::Shape(format!(
                "{} tokens but {} tags",
                tokens.len(),
                tags.len()
            )));
        }
        Ok(TaskInstance {
            tokens,
            target: Target::Tags(tags),
        })
    }

    /// Targets are the inputs shifted left by one with `eos` appended.
    pub fn lm(tokens: Vec<usize>, eos: usize) -> Self {
        let mut next: Vec<usize> = tokens.iter().skip(1).copied().collect();
        next.push(eos);
        TaskInstance {
            tokens,
            target: Target::NextTokens(next),
        }
    }

    pub fn task(&self) -> Task {
        match self.target {
            Target::Number(_) => Task::Agreement,
            Target::Tags(_) => Task::Supertag,
            Target::NextTokens(_) => Task::Lm,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BatchLabels {
    /// One number per sentence, attached to the final preamble position.
    Numbers(Vec<Number>),
    /// Per-position class ids, padded with 0 where the mask is 0.
    Sequence(Vec<Vec<usize>>),
}

/// A padded batch. Rows of `tokens`, `mask` and sequence labels all have
/// width `max_len`; positions at or beyond `lengths[i]` hold `pad_id` with mask 0.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskBatch {
    pub task: Task,
    pub tokens: Vec<Vec<usize>>,
    pub lengths: Vec<usize>,
    pub mask: Vec<Vec<u8>>,
    pub labels: BatchLabels,
    pub pad_id: usize,
}

impl TaskBatch {
    pub fn from_instances(instances: &[&TaskInstance], pad_id: usize) -> Result<Self> {
        let first = instances
            .first()
            .ok_or_else(|| Error::EmptyBatch("no instances".into()))?;
        let task = first.task();
        let max_len = instances.iter().map(|i| i.len()).max().unwrap_or(0);
        let mut tokens = Vec::with_capacity(instances.len());
        let mut mask = Vec::with_capacity(instances.len());
        let mut lengths = Vec::with_capacity(instances.len());
        let mut numbers = Vec::new();
        let mut seqs = Vec::new();
        for inst in instances {
            if inst.task() != task {
                return Err(Error::Shape(
                    "batch mixes instances of different tasks".into(),
                ));
            }
            if inst.is_empty() {
                return Err(Error::Shape("instance with an empty token sequence".into()));
            }
            let n = inst.len();
            let mut row = inst.tokens.clone();
            row.resize(max_len, pad_id);
            tokens.push(row);
            let mut m = vec![1u8; n];
            m.resize(max_len, 0);
            mask.push(m);
            lengths.push(n);
            match &inst.target {
                Target::Number(num) => numbers.push(*num),
                Target::Tags(t) | Target::NextTokens(t) => {
                    if t.len() != n {
                        return Err(Error::Shape(format!("{n} tokens but {} labels", t.len())));
                    }
                    let mut r = t.clone();
                    r.resize(max_len, 0);
                    seqs.push(r);
                }
            }
        }
        let labels = match task {
            Task::Agreement => BatchLabels::Numbers(numbers),
            _ => BatchLabels::Sequence(seqs),
        };
        Ok(TaskBatch {
            task,
            tokens,
            lengths,
            mask,
            labels,
            pad_id,
        })
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// Unpadded tokens of row `i`.
    pub fn row(&self, i: usize) -> &[usize] {
        &self.tokens[i][..self.lengths[i]]
    }

    /// Unpadded labels of row `i` for sequence tasks.
    pub fn row_labels(&self, i: usize) -> Option<&[usize]> {
        match &self.labels {
            BatchLabels::Sequence(s) => Some(&s[i][..self.lengths[i]]),
            BatchLabels::Numbers(_) => None,
        }
    }

    pub fn number(&self, i: usize) -> Option<Number> {
        match &self.labels {
            BatchLabels::Numbers(n) => Some(n[i]),
            BatchLabels::Sequence(_) => None,
        }
    }

    /// Count of positions with mask 1.
    pub fn n_tokens(&self) -> usize {
        self.lengths.iter().sum()
    }
}

/// Order of instance indices for one epoch.
pub(crate) fn epoch_order(n: usize, rng: &mut Rng, shuffle: bool) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    if shuffle {
        rng.shuffle(&mut order);
    }
    order
}

/// Splits the instances into padded batches; each instance appears exactly once.
pub fn make_batches(
    instances: &[TaskInstance],
    batch_size: usize,
    pad_id: usize,
    rng: &mut Rng,
    shuffle: bool,
) -> Result<Vec<TaskBatch>> {
    if batch_size == 0 {
        return Err(Error::Config("batch_size must be at least 1".into()));
    }
    if instances.is_empty() {
        return Err(Error::EmptyBatch("no training instances".into()));
    }
    let order = epoch_order(instances.len(), rng, shuffle);
    order
        .chunks(batch_size)
        .map(|chunk| {
            let refs: Vec<&TaskInstance> = chunk.iter().map(|&i| &instances[i]).collect();
            TaskBatch::from_instances(&refs, pad_id)
        })
        .collect()
}
