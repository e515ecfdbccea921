use crate::error::{Error, Result};
use crate::numeric::sigmoid;

use super::params::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Input = 0,
    Forget = 1,
    Output = 2,
    /// Candidate cell value `g`, the only tanh gate.
    Cell = 3,
}

pub const GATES: [Gate; 4] = [Gate::Input, Gate::Forget, Gate::Output, Gate::Cell];

/// Everything the backward pass needs from a forward run. Per-step vectors are
/// stored flat: gate blocks are laid out `[i | f | o | g]`, each of width `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardTrace {
    d: usize,
    tokens: Vec<usize>,
    preacts: Vec<f64>,
    acts: Vec<f64>,
    cells: Vec<f64>,
    hidden: Vec<f64>,
}

impl ForwardTrace {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn tokens(&self) -> &[usize] {
        &self.tokens
    }

    pub fn h(&self, t: usize) -> &[f64] {
        &self.hidden[t * self.d..(t + 1) * self.d]
    }

    pub fn c(&self, t: usize) -> &[f64] {
        &self.cells[t * self.d..(t + 1) * self.d]
    }

    pub fn last_h(&self) -> &[f64] {
        self.h(self.len() - 1)
    }

    pub fn gate_preact(&self, t: usize, g: Gate) -> &[f64] {
        let base = t * 4 * self.d + g as usize * self.d;
        &self.preacts[base..base + self.d]
    }

    pub fn gate_act(&self, t: usize, g: Gate) -> &[f64] {
        let base = t * 4 * self.d + g as usize * self.d;
        &self.acts[base..base + self.d]
    }
}

/// Runs the LSTM over `tokens` from zero initial state:
/// `i,f,o = σ(·)`, `g = tanh(·)`, `c_t = f⊙c_{t-1} + i⊙g`, `h_t = o⊙tanh(c_t)`.
pub fn encode(params: &ModelParams, tokens: &[usize]) -> Result<ForwardTrace> {
    if tokens.is_empty() {
        return Err(Error::Shape("cannot encode an empty sequence".into()));
    }
    let vocab_size = params.vocab_size();
    if let Some((position, &id)) = tokens.iter().enumerate().find(|(_, &id)| id >= vocab_size) {
        return Err(Error::Vocabulary {
            id,
            position,
            vocab_size,
        });
    }
    let d = params.d();
    let n = tokens.len();
    let mut trace = ForwardTrace {
        d,
        tokens: tokens.to_vec(),
        preacts: vec![0.0; n * 4 * d],
        acts: vec![0.0; n * 4 * d],
        cells: vec![0.0; n * d],
        hidden: vec![0.0; n * d],
    };
    let zeros = vec![0.0; d];
    for (t, &tok) in tokens.iter().enumerate() {
        let x = params.embedding.row(tok);
        let (h_prev, c_prev) = if t == 0 {
            (zeros.as_slice(), zeros.as_slice())
        } else {
            let (hs, cs) = (&trace.hidden, &trace.cells);
            (&hs[(t - 1) * d..t * d], &cs[(t - 1) * d..t * d])
        };
        let mut pre = vec![0.0; 4 * d];
        for g in GATES {
            let gp = params.lstm.gate(g);
            let block = &mut pre[g as usize * d..(g as usize + 1) * d];
            block.copy_from_slice(gp.bias.data());
            gp.input.vecmat_acc(x, block);
            gp.recurrent.vecmat_acc(h_prev, block);
        }
        let mut act = pre.clone();
        for (k, a) in act.iter_mut().enumerate() {
            *a = if k >= 3 * d { a.tanh() } else { sigmoid(*a) };
        }
        let mut c = vec![0.0; d];
        let mut h = vec![0.0; d];
        for j in 0..d {
            let (i, f, o, g) = (act[j], act[d + j], act[2 * d + j], act[3 * d + j]);
            c[j] = f * c_prev[j] + i * g;
            h[j] = o * c[j].tanh();
        }
        trace.preacts[t * 4 * d..(t + 1) * 4 * d].copy_from_slice(&pre);
        trace.acts[t * 4 * d..(t + 1) * 4 * d].copy_from_slice(&act);
        trace.cells[t * d..(t + 1) * d].copy_from_slice(&c);
        trace.hidden[t * d..(t + 1) * d].copy_from_slice(&h);
    }
    Ok(trace)
}

/// Backpropagation through time. `dh` holds `∂L/∂h_t` contributed by the
/// heads, flattened `len × d`; encoder gradients are accumulated into `grads`.
pub fn backward(
    params: &ModelParams,
    trace: &ForwardTrace,
    dh: &[f64],
    grads: &mut ModelParams,
) -> Result<()> {
    let d = trace.d;
    let n = trace.len();
    if dh.len() != n * d {
        return Err(Error::Shape(format!(
            "output gradients have {} entries, trace needs {n}x{d}",
            dh.len()
        )));
    }
    if grads.d() != d || params.d() != d {
        return Err(Error::Shape(
            "gradient buffer does not match trace width".into(),
        ));
    }
    let zeros = vec![0.0; d];
    let mut dh_next = vec![0.0; d];
    let mut dc_next = vec![0.0; d];
    let mut dpre = vec![0.0; 4 * d];
    let mut dx = vec![0.0; d];
    for t in (0..n).rev() {
        let act = &trace.acts[t * 4 * d..(t + 1) * 4 * d];
        let c = trace.c(t);
        let c_prev = if t == 0 { &zeros[..] } else { trace.c(t - 1) };
        let h_prev = if t == 0 { &zeros[..] } else { trace.h(t - 1) };
        for j in 0..d {
            let (i, f, o, g) = (act[j], act[d + j], act[2 * d + j], act[3 * d + j]);
            let dh_total = dh[t * d + j] + dh_next[j];
            let tc = c[j].tanh();
            let d_o = dh_total * tc;
            let dc = dc_next[j] + dh_total * o * (1.0 - tc * tc);
            let d_i = dc * g;
            let d_g = dc * i;
            let d_f = dc * c_prev[j];
            dc_next[j] = dc * f;
            dpre[j] = d_i * i * (1.0 - i);
            dpre[d + j] = d_f * f * (1.0 - f);
            dpre[2 * d + j] = d_o * o * (1.0 - o);
            dpre[3 * d + j] = d_g * (1.0 - g * g);
        }
        let x = params.embedding.row(trace.tokens[t]);
        dx.fill(0.0);
        dh_next.fill(0.0);
        for gate in GATES {
            let block = &dpre[gate as usize * d..(gate as usize + 1) * d];
            let gp = params.lstm.gate(gate);
            let gg = &mut grads.lstm.gates[gate as usize];
            gg.input.add_outer(x, block);
            if t > 0 {
                gg.recurrent.add_outer(h_prev, block);
            }
            for (b, v) in gg.bias.data_mut().iter_mut().zip(block) {
                *b += v;
            }
            gp.input.matvec_acc(block, &mut dx);
            gp.recurrent.matvec_acc(block, &mut dh_next);
        }
        for (e, v) in grads.embedding.row_mut(trace.tokens[t]).iter_mut().zip(&dx) {
            *e += v;
        }
    }
    Ok(())
}
