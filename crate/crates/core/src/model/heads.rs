use crate::error::{Error, Result};
use crate::numeric::{dot, sigmoid, softmax_in_place};

use super::config::Head;
use super::params::{LinearHead, ModelParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SoftmaxHead {
    Supertag,
    Lm,
}

impl From<SoftmaxHead> for Head {
    fn from(h: SoftmaxHead) -> Head {
        match h {
            SoftmaxHead::Supertag => Head::Supertag,
            SoftmaxHead::Lm => Head::Lm,
        }
    }
}

pub(crate) fn require(params: &ModelParams, head: Head) -> Result<&LinearHead> {
    params
        .head(head)
        .ok_or_else(|| Error::Config(format!("model has no {head} head")))
}

/// Probability that the upcoming verb is plural (plural = 1).
pub fn head_agreement(params: &ModelParams, h: &[f64]) -> Result<f64> {
    let head = require(params, Head::Agreement)?;
    Ok(sigmoid(agreement_logit(head, h)))
}

pub(crate) fn agreement_logit(head: &LinearHead, h: &[f64]) -> f64 {
    dot(head.weight.data(), h) + head.bias.data()[0]
}

pub fn head_logits(params: &ModelParams, h: &[f64], which: SoftmaxHead) -> Result<Vec<f64>> {
    let head = require(params, which.into())?;
    Ok(linear(head, h))
}

pub(crate) fn linear(head: &LinearHead, h: &[f64]) -> Vec<f64> {
    let mut out = head.bias.data().to_vec();
    head.weight.vecmat_acc(h, &mut out);
    out
}

pub fn head_softmax(params: &ModelParams, h: &[f64], which: SoftmaxHead) -> Result<Vec<f64>> {
    let mut p = head_logits(params, h, which)?;
    softmax_in_place(&mut p);
    Ok(p)
}
