use crate::error::{Error, Result};
use crate::model::ModelParams;

pub const ADAGRAD_EPSILON: f64 = 1e-8;

/// Accumulated squared gradients, shaped like the parameters.
/// Entries are non-negative and never decrease.
#[derive(Clone, Debug)]
pub struct AdaGradState {
    pub accum: ModelParams,
    pub epsilon: f64,
}

impl AdaGradState {
    pub fn new(params: &ModelParams) -> Self {
        AdaGradState {
            accum: params.zeros_like(),
            epsilon: ADAGRAD_EPSILON,
        }
    }
}

fn check_aligned(params: &ModelParams, grads: &ModelParams, state: &AdaGradState) -> Result<()> {
    let (pt, gt, st) = (params.tensors(), grads.tensors(), state.accum.tensors());
    if gt.len() != pt.len() || st.len() != pt.len() {
        return Err(Error::Shape(
            "gradient, state and parameter structures differ".into(),
        ));
    }
    for (((pn, p), (gn, g)), (sn, s)) in pt.iter().zip(&gt).zip(&st) {
        if pn != gn || pn != sn || p.shape() != g.shape() || p.shape() != s.shape() {
            return Err(Error::Shape(format!(
                "tensor `{pn}` is misaligned with its gradient or state"
            )));
        }
        if !g.all_finite() {
            return Err(Error::Numeric(format!("non-finite gradient in `{gn}`")));
        }
    }
    Ok(())
}

/// `G += g²; θ -= lr · g / (sqrt(G) + ε)`. A non-finite gradient aborts the
/// step before anything is modified.
pub fn adagrad_step(
    params: &mut ModelParams,
    grads: &ModelParams,
    state: &mut AdaGradState,
    lr: f64,
) -> Result<()> {
    check_aligned(params, grads, state)?;
    let eps = state.epsilon;
    let gt = grads.tensors();
    for (((_, p), (_, s)), (_, g)) in params
        .tensors_mut()
        .into_iter()
        .zip(state.accum.tensors_mut())
        .zip(gt)
    {
        for ((p, s), g) in p.data_mut().iter_mut().zip(s.data_mut()).zip(g.data()) {
            *s += g * g;
            *p -= lr * g / (s.sqrt() + eps);
        }
    }
    Ok(())
}
