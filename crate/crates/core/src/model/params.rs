use crate::error::{Error, Result};
use crate::numeric::{FlatParams, Matrix, Rng};

use super::config::{Head, ModelConfig};
use super::lstm::{Gate, GATES};

/// Input weights `x·W`, recurrent weights `h·U` and bias for one LSTM gate.
#[derive(Clone, Debug, PartialEq)]
pub struct GateParams {
    pub input: Matrix,
    pub recurrent: Matrix,
    pub bias: Matrix,
}

/// Gate blocks in the order input, forget, output, cell candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub gates: [GateParams; 4],
}

impl LstmParams {
    pub fn gate(&self, g: Gate) -> &GateParams {
        &self.gates[g as usize]
    }
}

/// `logits = h·weight + bias`, `weight` is `d × k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearHead {
    pub weight: Matrix,
    pub bias: Matrix,
}

impl LinearHead {
    fn zeros(d: usize, k: usize) -> Self {
        LinearHead {
            weight: Matrix::zeros(d, k),
            bias: Matrix::zeros(1, k),
        }
    }

    pub fn outputs(&self) -> usize {
        self.weight.cols()
    }
}

/// Every trainable tensor of the model. Also used as the container for
/// gradients and optimizer accumulators, which share its shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub embedding: Matrix,
    pub lstm: LstmParams,
    pub agreement: Option<LinearHead>,
    pub supertag: Option<LinearHead>,
    pub lm: Option<LinearHead>,
}

const GATE_TENSOR_NAMES: [[&str; 3]; 4] = [
    ["lstm.w_i", "lstm.u_i", "lstm.b_i"],
    ["lstm.w_f", "lstm.u_f", "lstm.b_f"],
    ["lstm.w_o", "lstm.u_o", "lstm.b_o"],
    ["lstm.w_g", "lstm.u_g", "lstm.b_g"],
];

const ENCODER_TENSORS: usize = 13;

impl ModelParams {
    pub fn zeros(cfg: &ModelConfig) -> Self {
        let d = cfg.d;
        let gate = || GateParams {
            input: Matrix::zeros(d, d),
            recurrent: Matrix::zeros(d, d),
            bias: Matrix::zeros(1, d),
        };
        ModelParams {
            embedding: Matrix::zeros(cfg.vocab_size, d),
            lstm: LstmParams {
                gates: [gate(), gate(), gate(), gate()],
            },
            agreement: cfg.has(Head::Agreement).then(|| LinearHead::zeros(d, 1)),
            supertag: cfg
                .has(Head::Supertag)
                .then(|| LinearHead::zeros(d, cfg.n_supertags)),
            lm: cfg
                .has(Head::Lm)
                .then(|| LinearHead::zeros(d, cfg.vocab_size)),
        }
    }

    pub fn zeros_like(&self) -> Self {
        let z = |m: &Matrix| Matrix::zeros(m.rows(), m.cols());
        let zh = |h: &Option<LinearHead>| {
            h.as_ref().map(|h| LinearHead {
                weight: z(&h.weight),
                bias: z(&h.bias),
            })
        };
        ModelParams {
            embedding: z(&self.embedding),
            lstm: LstmParams {
                gates: self.lstm.gates.clone().map(|g| GateParams {
                    input: z(&g.input),
                    recurrent: z(&g.recurrent),
                    bias: z(&g.bias),
                }),
            },
            agreement: zh(&self.agreement),
            supertag: zh(&self.supertag),
            lm: zh(&self.lm),
        }
    }

    pub fn d(&self) -> usize {
        self.embedding.cols()
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.rows()
    }

    pub fn head(&self, head: Head) -> Option<&LinearHead> {
        match head {
            Head::Agreement => self.agreement.as_ref(),
            Head::Supertag => self.supertag.as_ref(),
            Head::Lm => self.lm.as_ref(),
        }
    }

    pub fn head_mut(&mut self, head: Head) -> Option<&mut LinearHead> {
        match head {
            Head::Agreement => self.agreement.as_mut(),
            Head::Supertag => self.supertag.as_mut(),
            Head::Lm => self.lm.as_mut(),
        }
    }

    /// Named tensors in canonical order: embedding, LSTM gates, then heads.
    pub fn tensors(&self) -> Vec<(&'static str, &Matrix)> {
        let mut out: Vec<(&'static str, &Matrix)> = vec![("embedding", &self.embedding)];
        for (g, names) in self.lstm.gates.iter().zip(GATE_TENSOR_NAMES) {
            out.push((names[0], &g.input));
            out.push((names[1], &g.recurrent));
            out.push((names[2], &g.bias));
        }
        for (prefix, head) in [
            ("agreement", &self.agreement),
            ("supertag", &self.supertag),
            ("lm", &self.lm),
        ] {
            if let Some(h) = head {
                out.push((weight_name(prefix), &h.weight));
                out.push((bias_name(prefix), &h.bias));
            }
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut Matrix)> {
        let mut out: Vec<(&'static str, &mut Matrix)> = vec![("embedding", &mut self.embedding)];
        for (g, names) in self.lstm.gates.iter_mut().zip(GATE_TENSOR_NAMES) {
            out.push((names[0], &mut g.input));
            out.push((names[1], &mut g.recurrent));
            out.push((names[2], &mut g.bias));
        }
        for (prefix, head) in [
            ("agreement", &mut self.agreement),
            ("supertag", &mut self.supertag),
            ("lm", &mut self.lm),
        ] {
            if let Some(h) = head {
                out.push((weight_name(prefix), &mut h.weight));
                out.push((bias_name(prefix), &mut h.bias));
            }
        }
        out
    }

    /// Tensors shared by all tasks (embedding and LSTM).
    pub fn encoder_tensors(&self) -> Vec<(&'static str, &Matrix)> {
        let mut t = self.tensors();
        t.truncate(ENCODER_TENSORS);
        t
    }

    /// `self += scale * other`; tensors absent from `other` are left alone.
    pub fn add_scaled(&mut self, other: &ModelParams, scale: f64) {
        let theirs = other.tensors();
        for (name, mine) in self.tensors_mut() {
            if let Some((_, t)) = theirs.iter().find(|(n, _)| *n == name) {
                mine.add_scaled(t, scale);
            }
        }
    }

    pub fn scale(&mut self, s: f64) {
        for (_, t) in self.tensors_mut() {
            t.scale(s);
        }
    }

    pub fn fill(&mut self, v: f64) {
        for (_, t) in self.tensors_mut() {
            t.fill(v);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.all_finite())
    }

    pub fn global_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .map(|(_, t)| t.frobenius_sq())
            .sum::<f64>()
            .sqrt()
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn bitwise_eq(&self, other: &ModelParams) -> bool {
        let a = self.tensors();
        let b = other.tensors();
        a.len() == b.len()
            && a.iter()
                .zip(&b)
                .all(|((na, ta), (nb, tb))| na == nb && ta.bitwise_eq(tb))
    }

    pub fn tensor(&self, name: &str) -> Option<&Matrix> {
        self.tensors()
            .into_iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t)
    }

    fn locate(&self, mut i: usize) -> (usize, usize) {
        for (k, (_, t)) in self.tensors().iter().enumerate() {
            if i < t.len() {
                return (k, i);
            }
            i -= t.len();
        }
        panic!("flat index out of range");
    }
}

fn weight_name(prefix: &str) -> &'static str {
    match prefix {
        "agreement" => "agreement.weight",
        "supertag" => "supertag.weight",
        _ => "lm.weight",
    }
}

fn bias_name(prefix: &str) -> &'static str {
    match prefix {
        "agreement" => "agreement.bias",
        "supertag" => "supertag.bias",
        _ => "lm.bias",
    }
}

impl FlatParams for ModelParams {
    fn flat_len(&self) -> usize {
        self.num_params()
    }

    fn flat_get(&self, i: usize) -> f64 {
        let (k, j) = self.locate(i);
        self.tensors()[k].1.data()[j]
    }

    fn flat_set(&mut self, i: usize, v: f64) {
        let (k, j) = self.locate(i);
        self.tensors_mut()[k].1.data_mut()[j] = v;
    }
}

/// Glorot-uniform weights drawn from a per-tensor named stream of the seed;
/// zero biases except the forget gate, which starts at 1.0.
pub fn init_params(cfg: &ModelConfig, seed: u64) -> Result<ModelParams> {
    cfg.validate()?;
    let mut params = ModelParams::zeros(cfg);
    for (name, t) in params.tensors_mut() {
        if name == "lstm.b_f" {
            t.fill(1.0);
        } else if name.ends_with("bias") || name.starts_with("lstm.b_") {
            // zero
        } else {
            let a = glorot_bound(t.rows(), t.cols());
            let mut rng = Rng::derive(seed, name);
            for x in t.data_mut() {
                *x = rng.uniform(-a, a);
            }
        }
    }
    debug_assert_eq!(GATES.len(), 4);
    Ok(params)
}

pub(crate) fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Copies embedding and LSTM tensors of `from` into a clone of `to`,
/// leaving the heads of `to` untouched.
pub fn transfer_encoder(from: &ModelParams, to: &ModelParams) -> Result<ModelParams> {
    if from.d() != to.d() || from.vocab_size() != to.vocab_size() {
        return Err(Error::Shape(format!(
            "cannot transfer encoder with d={} vocab={} into d={} vocab={}",
            from.d(),
            from.vocab_size(),
            to.d(),
            to.vocab_size()
        )));
    }
    let mut out = to.clone();
    out.embedding = from.embedding.clone();
    out.lstm = from.lstm.clone();
    Ok(out)
}
