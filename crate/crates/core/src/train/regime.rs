use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Number;
use crate::error::{Error, Result};
use crate::model::{agreement_logit, encode, linear, transfer_encoder, ModelParams};
use crate::numeric::{argmax, log_sum_exp, Rng};

use super::adagrad::{adagrad_step, AdaGradState};
use super::batch::{make_batches, Target, Task, TaskBatch, TaskInstance};
use super::loss::{batch_loss, combine_weights};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub shuffle: bool,
    /// Weight ratio of the second task in joint training.
    pub r: f64,
    /// Rescale the full gradient to this norm when it is exceeded.
    pub max_grad_norm: Option<f64>,
    pub freeze_embeddings: bool,
    /// Record elapsed seconds per epoch; when false the column is 0 so that
    /// metrics files are byte-identical across reruns.
    pub wall_clock: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 128,
            learning_rate: 0.05,
            seed: 1,
            shuffle: true,
            r: 0.0,
            max_grad_norm: None,
            freeze_embeddings: false,
            wall_clock: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.validate_allowing_zero_epochs()?;
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        Ok(())
    }

    fn validate_allowing_zero_epochs(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(
                "learning_rate must be positive and finite".into(),
            ));
        }
        combine_weights(self.r)?;
        if let Some(m) = self.max_grad_norm {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::Config("max_grad_norm must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Training and validation instances of one task.
#[derive(Clone, Debug)]
pub struct TaskData {
    pub task: Task,
    pub train: Vec<TaskInstance>,
    pub val: Vec<TaskInstance>,
    pub pad_id: usize,
}

impl TaskData {
    pub fn new(
        task: Task,
        train: Vec<TaskInstance>,
        val: Vec<TaskInstance>,
        pad_id: usize,
    ) -> Result<Self> {
        if let Some(bad) = train.iter().chain(&val).find(|i| i.task() != task) {
            return Err(Error::Label(format!(
                "{task} data contains a {} instance",
                bad.task()
            )));
        }
        Ok(TaskData {
            task,
            train,
            val,
            pad_id,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub epoch: usize,
    pub task: String,
    pub train_loss: f64,
    pub val_metric: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: ModelParams,
    pub metrics: Vec<MetricsRow>,
}

#[derive(Clone, Debug)]
pub struct PretrainOutcome {
    /// Parameters at the end of the first phase.
    pub phase_a: ModelParams,
    /// Second-phase model right after the encoder transfer.
    pub transferred: ModelParams,
    pub params: ModelParams,
    pub metrics: Vec<MetricsRow>,
}

pub fn write_metrics_csv(path: &Path, rows: &[MetricsRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| csv_error(path, e))?;
    }
    w.flush()
        .map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let ctx = format!("writing {}", path.display());
    match e.into_kind() {
        csv::ErrorKind::Io(e) => Error::io(ctx, e),
        other => Error::Config(format!("{ctx}: {other:?}")),
    }
}

/// Held-out metric: accuracy for agreement and tagging, perplexity for the
/// language model. `None` when there are no instances.
pub fn validation_metric(
    params: &ModelParams,
    task: Task,
    instances: &[TaskInstance],
) -> Result<Option<f64>> {
    if instances.is_empty() {
        return Ok(None);
    }
    let head = params
        .head(task.head())
        .ok_or_else(|| Error::Config(format!("model has no {task} head")))?;
    // (score, count): correct predictions or summed nats
    let parts: Vec<Result<(f64, usize)>> = instances
        .par_iter()
        .map(|inst| {
            let trace = encode(params, &inst.tokens)?;
            Ok(match &inst.target {
                Target::Number(n) => {
                    let p = agreement_logit(head, trace.last_h()) >= 0.0;
                    let pred = if p { Number::Pl } else { Number::Sg };
                    (f64::from(u8::from(pred == *n)), 1)
                }
                Target::Tags(tags) => {
                    let mut correct = 0usize;
                    for (t, &y) in tags.iter().enumerate() {
                        correct += usize::from(argmax(&linear(head, trace.h(t))) == y);
                    }
                    (correct as f64, tags.len())
                }
                Target::NextTokens(next) => {
                    let mut nats = 0.0;
                    for (t, &y) in next.iter().enumerate() {
                        let z = linear(head, trace.h(t));
                        nats += log_sum_exp(&z) - z[y];
                    }
                    (nats, next.len())
                }
            })
        })
        .collect();
    let (mut score, mut count) = (0.0, 0usize);
    for p in parts {
        let (s, c) = p?;
        score += s;
        count += c;
    }
    Ok(Some(match task {
        Task::Lm => (score / count as f64).exp(),
        _ => score / count as f64,
    }))
}

fn require_head(params: &ModelParams, task: Task) -> Result<()> {
    if params.head(task.head()).is_none() {
        return Err(Error::Config(format!("model has no {task} head")));
    }
    Ok(())
}

fn shuffle_rng(cfg: &TrainConfig, task: Task) -> Rng {
    Rng::derive(cfg.seed, &format!("shuffle/{}", task.name()))
}

fn apply_step(
    params: &mut ModelParams,
    mut grads: ModelParams,
    state: &mut AdaGradState,
    cfg: &TrainConfig,
) -> Result<()> {
    if cfg.freeze_embeddings {
        grads.embedding.fill(0.0);
    }
    if let Some(max) = cfg.max_grad_norm {
        let n = grads.global_norm();
        if n > max {
            grads.scale(max / n);
        }
    }
    adagrad_step(params, &grads, state, cfg.learning_rate)
}

fn aborted(epoch: usize, batch: usize, task: &str) -> impl FnOnce(Error) -> Error + '_ {
    move |e| Error::TrainingAborted {
        epoch,
        batch,
        task: task.to_string(),
        source: Box::new(e),
    }
}

fn finite_loss(l: f64) -> Result<f64> {
    if l.is_finite() {
        Ok(l)
    } else {
        Err(Error::Numeric(format!("loss became {l}")))
    }
}

fn elapsed(start: Instant, cfg: &TrainConfig) -> f64 {
    if cfg.wall_clock {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    }
}

fn run_single(mut params: ModelParams, data: &TaskData, cfg: &TrainConfig) -> Result<TrainOutcome> {
    require_head(&params, data.task)?;
    if data.train.is_empty() {
        return Err(Error::EmptyBatch(format!(
            "no {} training instances",
            data.task
        )));
    }
    let task = data.task.name();
    let mut rng = shuffle_rng(cfg, data.task);
    let mut state = AdaGradState::new(&params);
    let mut metrics = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        let batches = make_batches(
            &data.train,
            cfg.batch_size,
            data.pad_id,
            &mut rng,
            cfg.shuffle,
        )?;
        let mut total = 0.0;
        for (b, batch) in batches.iter().enumerate() {
            let mut step = || -> Result<f64> {
                let (l, g) = batch_loss(&params, batch)?;
                let l = finite_loss(l)?;
                apply_step(&mut params, g, &mut state, cfg)?;
                Ok(l)
            };
            total += step().map_err(aborted(epoch, b + 1, task))?;
        }
        let val = validation_metric(&params, data.task, &data.val)?;
        metrics.push(MetricsRow {
            epoch,
            task: task.to_string(),
            train_loss: total / batches.len() as f64,
            val_metric: val,
            wall_seconds: elapsed(start, cfg),
        });
    }
    Ok(TrainOutcome { params, metrics })
}

/// Trains one task for `cfg.epochs` epochs of AdaGrad steps.
pub fn train_single(
    params: ModelParams,
    data: &TaskData,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    run_single(params, data, cfg)
}

/// Batches of one task that restart with a fresh shuffle once exhausted.
struct BatchStream<'a> {
    data: &'a TaskData,
    rng: Rng,
    batches: Vec<TaskBatch>,
    pos: usize,
}

impl<'a> BatchStream<'a> {
    fn new(data: &'a TaskData, cfg: &TrainConfig) -> Self {
        BatchStream {
            data,
            rng: shuffle_rng(cfg, data.task),
            batches: Vec::new(),
            pos: 0,
        }
    }

    fn refill(&mut self, cfg: &TrainConfig) -> Result<usize> {
        self.batches = make_batches(
            &self.data.train,
            cfg.batch_size,
            self.data.pad_id,
            &mut self.rng,
            cfg.shuffle,
        )?;
        self.pos = 0;
        Ok(self.batches.len())
    }

    fn next(&mut self, cfg: &TrainConfig) -> Result<&TaskBatch> {
        if self.pos == self.batches.len() {
            self.refill(cfg)?;
        }
        self.pos += 1;
        Ok(&self.batches[self.pos - 1])
    }
}

/// One AdaGrad step per pair of batches on `L1/(1+r) + r/(1+r) L2`. An epoch
/// ends once the larger corpus has been seen; the smaller one is recycled.
pub fn train_joint(
    mut params: ModelParams,
    first: &TaskData,
    second: &TaskData,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if first.task == second.task {
        return Err(Error::Config(
            "joint training needs two different tasks".into(),
        ));
    }
    require_head(&params, first.task)?;
    require_head(&params, second.task)?;
    for d in [first, second] {
        if d.train.is_empty() {
            return Err(Error::EmptyBatch(format!(
                "no {} training instances",
                d.task
            )));
        }
    }
    let (w1, w2) = combine_weights(cfg.r)?;
    let label = format!("{}+{}", first.task, second.task);
    let mut s1 = BatchStream::new(first, cfg);
    let mut s2 = BatchStream::new(second, cfg);
    let mut state = AdaGradState::new(&params);
    let mut metrics = Vec::new();
    for epoch in 1..=cfg.epochs {
        let start = Instant::now();
        let steps = s1.refill(cfg)?.max(s2.refill(cfg)?);
        let (mut t1, mut t2, mut tj) = (0.0, 0.0, 0.0);
        for b in 0..steps {
            let mut step = || -> Result<(f64, f64)> {
                let (l1, mut g) = batch_loss(&params, s1.next(cfg)?)?;
                let (l2, g2) = batch_loss(&params, s2.next(cfg)?)?;
                let (l1, l2) = (finite_loss(l1)?, finite_loss(l2)?);
                if w1 != 1.0 {
                    g.scale(w1);
                }
                if w2 != 0.0 {
                    g.add_scaled(&g2, w2);
                }
                apply_step(&mut params, g, &mut state, cfg)?;
                Ok((l1, l2))
            };
            let (l1, l2) = step().map_err(aborted(epoch, b + 1, &label))?;
            t1 += l1;
            t2 += l2;
            tj += w1 * l1 + w2 * l2;
        }
        let wall = elapsed(start, cfg);
        let n = steps as f64;
        for (data, loss) in [(first, t1 / n), (second, t2 / n)] {
            metrics.push(MetricsRow {
                epoch,
                task: data.task.name().to_string(),
                train_loss: loss,
                val_metric: validation_metric(&params, data.task, &data.val)?,
                wall_seconds: wall,
            });
        }
        metrics.push(MetricsRow {
            epoch,
            task: "joint".into(),
            train_loss: tj / n,
            val_metric: None,
            wall_seconds: wall,
        });
    }
    Ok(TrainOutcome { params, metrics })
}

/// Trains `params_a` on the first task, copies its encoder into the freshly
/// initialized `fresh_b`, then trains that on the second task. The second
/// phase may have zero epochs.
pub fn pretrain_then_train(
    params_a: ModelParams,
    data_a: &TaskData,
    cfg_a: &TrainConfig,
    fresh_b: ModelParams,
    data_b: &TaskData,
    cfg_b: &TrainConfig,
) -> Result<PretrainOutcome> {
    cfg_a.validate()?;
    cfg_b.validate_allowing_zero_epochs()?;
    require_head(&fresh_b, data_b.task)?;
    let a = run_single(params_a, data_a, cfg_a)?;
    let transferred = transfer_encoder(&a.params, &fresh_b)?;
    let b = run_single(transferred.clone(), data_b, cfg_b)?;
    let mut metrics = a.metrics;
    metrics.extend(b.metrics);
    Ok(PretrainOutcome {
        phase_a: a.params,
        transferred,
        params: b.params,
        metrics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{init_params, Head, ModelConfig};

    fn agreement_data(n: usize, seed: u64) -> TaskData {
        let mut rng = Rng::new(seed);
        let inst = (0..n)
            .map(|_| {
                let pl = rng.bernoulli(0.5);
                let len = 1 + rng.below(4);
                let mut toks: Vec<usize> = (0..len).map(|_| 4 + rng.below(6)).collect();
                toks[0] = if pl { 3 } else { 2 };
                TaskInstance {
                    tokens: toks,
                    target: Target::Number(if pl { Number::Pl } else { Number::Sg }),
                }
            })
            .collect();
        TaskData::new(Task::Agreement, inst, Vec::new(), 0).unwrap()
    }

    fn model(seed: u64) -> ModelParams {
        let c = ModelConfig::new(4, 10, 0, &[Head::Agreement, Head::Lm]).unwrap();
        init_params(&c, seed).unwrap()
    }

    #[test]
    fn loss_decreases_and_is_deterministic() {
        let data = agreement_data(64, 1);
        let cfg = TrainConfig {
            epochs: 3,
            batch_size: 8,
            wall_clock: false,
            ..TrainConfig::default()
        };
        let a = train_single(model(1), &data, &cfg).unwrap();
        let b = train_single(model(1), &data, &cfg).unwrap();
        assert!(a.params.bitwise_eq(&b.params));
        assert_eq!(a.metrics, b.metrics);
        assert!(a.metrics[2].train_loss < a.metrics[0].train_loss);
    }

    #[test]
    fn zero_epochs_rejected_for_single_task() {
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        let r = train_single(model(1), &agreement_data(4, 1), &cfg);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn missing_head_is_configuration_error() {
        let c = ModelConfig::new(3, 10, 0, &[Head::Lm]).unwrap();
        let p = init_params(&c, 1).unwrap();
        let r = train_single(p, &agreement_data(4, 1), &TrainConfig::default());
        assert!(matches!(r, Err(Error::Config(_))));
    }
}
