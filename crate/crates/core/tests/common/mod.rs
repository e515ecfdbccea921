//! Test-side oracles written independently of the library's batched code.
#![allow(dead_code)]

use agreelab::corpus::{Number, Sentence};
use agreelab::model::{init_params, Head, ModelConfig, ModelParams};
use agreelab::numeric::{Matrix, Rng};
use agreelab::train::{Target, TaskInstance};
use std::ops::{Add, Div, Mul, Sub};

pub mod dd;
pub use dd::Dd;

pub fn model(d: usize, vocab: usize, tags: usize, heads: &[Head], seed: u64) -> ModelParams {
    let cfg = ModelConfig::new(d, vocab, tags, heads).unwrap();
    init_params(&cfg, seed).unwrap()
}

/// Perturbs every parameter so tests do not sit at the zero-initialised biases.
pub fn jitter(params: &mut ModelParams, seed: u64, scale: f64) {
    let mut rng = Rng::new(seed);
    for (_, m) in params.tensors_mut() {
        for v in m.data_mut() {
            *v += rng.uniform(-scale, scale);
        }
    }
}

/// Scalar arithmetic the oracles need, so they can run in f64 or [`Dd`].
pub trait Real:
    Copy + From<f64> + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn tanh(self) -> Self;
    fn hi(self) -> f64;
    fn sig(self) -> Self {
        Self::from(1.0) / (Self::from(1.0) + (Self::from(0.0) - self).exp())
    }
}

impl Real for f64 {
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    fn tanh(self) -> f64 {
        f64::tanh(self)
    }
    fn hi(self) -> f64 {
        self
    }
}

impl Real for Dd {
    fn exp(self) -> Dd {
        Dd::exp(self)
    }
    fn ln(self) -> Dd {
        Dd::ln(self)
    }
    fn tanh(self) -> Dd {
        Dd::tanh(self)
    }
    fn hi(self) -> f64 {
        self.hi
    }
    fn sig(self) -> Dd {
        self.sigmoid()
    }
}

fn at<R: Real>(m: &Matrix, r: usize, c: usize) -> R {
    R::from(m.get(r, c))
}

/// Hidden states by a direct transcription of the LSTM recurrence.
pub fn naive_hidden_in<R: Real>(p: &ModelParams, tokens: &[usize]) -> Vec<Vec<R>> {
    let d = p.embedding.cols();
    let zero = R::from(0.0);
    let mut h = vec![zero; d];
    let mut c = vec![zero; d];
    let mut out = Vec::new();
    for &tok in tokens {
        let x: Vec<R> = (0..d).map(|k| at(&p.embedding, tok, k)).collect();
        let gate = |g: usize| -> Vec<R> {
            let gp = &p.lstm.gates[g];
            (0..d)
                .map(|j| {
                    let mut s = at(&gp.bias, 0, j);
                    for k in 0..d {
                        s = s + x[k] * at(&gp.input, k, j) + h[k] * at(&gp.recurrent, k, j);
                    }
                    s
                })
                .collect()
        };
        let (i, f, o, g) = (gate(0), gate(1), gate(2), gate(3));
        for j in 0..d {
            c[j] = f[j].sig() * c[j] + i[j].sig() * g[j].tanh();
        }
        h = (0..d).map(|j| o[j].sig() * c[j].tanh()).collect();
        out.push(h.clone());
    }
    out
}

pub fn naive_hidden(p: &ModelParams, tokens: &[usize]) -> Vec<Vec<f64>> {
    naive_hidden_in(p, tokens)
}

fn affine<R: Real>(w: &Matrix, b: &Matrix, h: &[R]) -> Vec<R> {
    (0..w.cols())
        .map(|j| (0..h.len()).fold(at(b, 0, j), |s, k| s + h[k] * at(w, k, j)))
        .collect()
}

/// `-ln softmax(z)[y]` through an explicit log-sum-exp.
pub fn nll_softmax<R: Real>(z: &[R], y: usize) -> R {
    let m = R::from(z.iter().map(|v| v.hi()).fold(f64::NEG_INFINITY, f64::max));
    let sum = z.iter().fold(R::from(0.0), |s, &v| s + (v - m).exp());
    m + sum.ln() - z[y]
}

/// Plural probability of the agreement head after the whole preamble.
pub fn naive_p_plural(p: &ModelParams, tokens: &[usize]) -> f64 {
    let h = naive_hidden(p, tokens);
    let head = p.agreement.as_ref().unwrap();
    affine(&head.weight, &head.bias, h.last().unwrap())[0].sig()
}

/// Summed negative log-likelihood of one instance and the count it is
/// averaged over (1 for agreement, tokens otherwise).
pub fn naive_nll<R: Real>(p: &ModelParams, inst: &TaskInstance) -> (R, usize) {
    let hs = naive_hidden_in::<R>(p, &inst.tokens);
    match &inst.target {
        Target::Number(n) => {
            let head = p.agreement.as_ref().unwrap();
            let z = affine(&head.weight, &head.bias, hs.last().unwrap())[0];
            let one = R::from(1.0);
            let nll = match n {
                Number::Pl => R::from(0.0) - z.sig().ln(),
                Number::Sg => R::from(0.0) - (one - z.sig()).ln(),
            };
            (nll, 1)
        }
        Target::Tags(t) | Target::NextTokens(t) => {
            let head = match &inst.target {
                Target::Tags(_) => p.supertag.as_ref().unwrap(),
                _ => p.lm.as_ref().unwrap(),
            };
            let s = hs.iter().zip(t).fold(R::from(0.0), |s, (h, &y)| {
                s + nll_softmax(&affine(&head.weight, &head.bias, h), y)
            });
            (s, t.len())
        }
    }
}

/// Mean loss of a set of instances of one task, averaged as the task defines.
pub fn naive_mean_loss_in<R: Real>(p: &ModelParams, insts: &[TaskInstance]) -> R {
    let (s, n) = insts
        .iter()
        .map(|i| naive_nll::<R>(p, i))
        .fold((R::from(0.0), 0usize), |a, b| (a.0 + b.0, a.1 + b.1));
    s / R::from(n as f64)
}

pub fn naive_mean_loss(p: &ModelParams, insts: &[TaskInstance]) -> f64 {
    naive_mean_loss_in(p, insts)
}

/// Mean loss in double-double minus `reference`, rounded to f64.
///
/// Subtracting the constant leaves gradients unchanged, while the returned
/// value is small enough that its f64 rounding is far below what a central
/// difference at `eps = 1e-5` has to resolve.
pub fn precise_shifted_loss(p: &ModelParams, insts: &[TaskInstance], reference: Dd) -> f64 {
    (naive_mean_loss_in::<Dd>(p, insts) - reference).to_f64()
}

/// Random instances of one task with tokens drawn from `2..vocab`.
pub fn random_instances(
    rng: &mut Rng,
    head: Head,
    n: usize,
    vocab: usize,
    tags: usize,
    max_len: usize,
) -> Vec<TaskInstance> {
    (0..n)
        .map(|_| {
            let len = 1 + rng.below(max_len);
            let tokens: Vec<usize> = (0..len).map(|_| 2 + rng.below(vocab - 2)).collect();
            match head {
                Head::Agreement => TaskInstance {
                    tokens,
                    target: Target::Number(if rng.bernoulli(0.5) {
                        Number::Pl
                    } else {
                        Number::Sg
                    }),
                },
                Head::Supertag => {
                    let t = (0..len).map(|_| rng.below(tags)).collect();
                    TaskInstance::tagging(tokens, t).unwrap()
                }
                Head::Lm => TaskInstance::lm(tokens, 1),
            }
        })
        .collect()
}

fn noun(pos: &str) -> Option<Number> {
    match pos {
        "NN" | "NNP" => Some(Number::Sg),
        "NNS" | "NNPS" => Some(Number::Pl),
        _ => None,
    }
}

/// Attractor bucket by re-scanning the tokens between subject and verb.
pub fn oracle_bucket(s: &Sentence) -> Option<String> {
    let (subj, verb) = (s.subject_index?, s.verb_index?);
    let subject = noun(&s.pos[subj]).or(s.verb_number)?;
    let mut opposite = 0;
    let mut same = 0;
    for p in &s.pos[subj + 1..verb] {
        match noun(p) {
            Some(n) if n == subject => same += 1,
            Some(_) => opposite += 1,
            None => {}
        }
    }
    Some(match (same, opposite) {
        (0, k) if k >= 4 => "4+".to_string(),
        (0, k) => k.to_string(),
        _ => "MIXED".to_string(),
    })
}

/// Number of the last noun before the verb.
pub fn oracle_last_noun(s: &Sentence) -> Option<Number> {
    let verb = s.verb_index?;
    let mut found = None;
    for p in &s.pos[..verb] {
        if let Some(n) = noun(p) {
            found = Some(n);
        }
    }
    found
}

/// Most frequent label; ties go to singular.
pub fn oracle_majority(labels: &[Number]) -> Number {
    let pl = labels.iter().filter(|&&n| n == Number::Pl).count();
    if 2 * pl > labels.len() {
        Number::Pl
    } else {
        Number::Sg
    }
}

/// A hand-annotated sentence; `tagged` is `word/POS` tokens.
pub fn sentence(tagged: &str, subject: usize, verb: usize) -> Sentence {
    let (tokens, pos): (Vec<String>, Vec<String>) = tagged
        .split_whitespace()
        .map(|t| {
            let (w, p) = t.rsplit_once('/').unwrap();
            (w.to_string(), p.to_string())
        })
        .unzip();
    let verb_number = match pos[verb].as_str() {
        "VBZ" => Some(Number::Sg),
        "VBP" => Some(Number::Pl),
        _ => None,
    };
    Sentence {
        tokens,
        pos,
        supertags: None,
        subject_index: Some(subject),
        verb_index: Some(verb),
        verb_number,
    }
}

pub fn number_of_men() -> Vec<Sentence> {
    vec![
        sentence("The/DT number/NN of/IN men/NNS is/VBZ not/RB clear/JJ ./.", 1, 4),
        sentence("The/DT ratio/NN of/IN men/NNS to/TO women/NNS is/VBZ not/RB clear/JJ ./.", 1, 6),
        sentence(
            "The/DT ratio/NN of/IN men/NNS to/TO women/NNS and/CC children/NNS is/VBZ not/RB clear/JJ ./.",
            1,
            8,
        ),
    ]
}
