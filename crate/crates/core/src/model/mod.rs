//! Shared embedding + single-layer LSTM encoder with agreement, supertag and
//! language-model heads. Forward and backward passes are written out by hand.

mod checkpoint;
mod config;
mod heads;
mod lstm;
mod params;

pub use checkpoint::{load_checkpoint, save_checkpoint, FORMAT_VERSION, LABEL_CONVENTION};
pub use config::{Head, ModelConfig};
pub(crate) use heads::{agreement_logit, linear};
pub use heads::{head_agreement, head_logits, head_softmax, SoftmaxHead};
pub use lstm::{backward, encode, ForwardTrace, Gate, GATES};
pub use params::{init_params, transfer_encoder, GateParams, LinearHead, LstmParams, ModelParams};
