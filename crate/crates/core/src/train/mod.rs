//! Task losses, AdaGrad and the single-task, joint and pre-training regimes.
//!
//! Losses are sample-averaged within each task before tasks are combined:
//! agreement over sentences, tagging and language modelling over tokens.

mod adagrad;
mod batch;
mod loss;
mod regime;

pub use adagrad::{adagrad_step, AdaGradState, ADAGRAD_EPSILON};
pub use batch::{make_batches, BatchLabels, Target, Task, TaskBatch, TaskInstance};
pub use loss::{
    agreement_nll, batch_loss, combine_losses, loss_agreement, loss_lm, loss_lm_bits,
    loss_supertag, mean_nll, softmax_nll,
};
pub use regime::{
    pretrain_then_train, train_joint, train_single, validation_metric, write_metrics_csv,
    MetricsRow, PretrainOutcome, TaskData, TrainConfig, TrainOutcome,
};
