use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{
    count_attractors, extract_all, filter_intervening_noun, generate_synthetic, pos_inventory,
    prune_supertags, read_jsonl, replace_rare, strip_pos_number, write_jsonl, Sentence,
    TagInventory, VerbPair, Vocab,
};
use crate::error::{Error, Result};
use crate::eval::{
    encode_item, eval_agreement, eval_baselines, eval_perplexity, eval_probes,
    eval_psycholinguistic, eval_supertag, expand_templates, EvalReport, PosLexicon,
    PsycholinguisticReport, SuiteName, TemplateItem, TemplateSuite, ATTRACTOR_BUCKETS,
};
use crate::model::{
    encode, head_agreement, init_params, load_checkpoint, save_checkpoint, Head, ModelConfig,
    ModelParams,
};
use crate::numeric::Rng;
use crate::train::{
    pretrain_then_train, train_joint, train_single, write_metrics_csv, MetricsRow, TaskData,
    TaskInstance,
};

use super::config::{ExperimentConfig, Regime, TaskSpec};
use super::svg::{fmt_value, Chart, Series};

pub const SPLITS: [&str; 3] = ["train", "val", "test"];

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))
}

/// Rows as CSV text; every field is quoted only when needed.
fn csv_text(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Config(format!("csv: {e}")))
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_value).unwrap_or_default()
}

/// Writes `<stem>.csv` with exactly the plotted numbers and `<stem>.svg`.
fn write_plot(dir: &Path, stem: &str, chart: &Chart, bars: bool) -> Result<()> {
    let mut rows = Vec::new();
    for s in &chart.series {
        for (j, v) in s.values.iter().enumerate() {
            if let Some(v) = v {
                rows.push(vec![
                    s.name.clone(),
                    chart.categories[j].clone(),
                    fmt_value(*v),
                    opt(s.errors.get(j).copied().flatten()),
                ]);
            }
        }
    }
    write_file(
        &dir.join(format!("{stem}.csv")),
        &csv_text(&["series", "x", "value", "std"], &rows)?,
    )?;
    let svg = if bars {
        chart.to_bar_svg()
    } else {
        chart.to_line_svg()
    };
    write_file(&dir.join(format!("{stem}.svg")), &svg)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub n_sentences: usize,
    /// Agreement sentences per attractor bucket, `MIXED` included.
    pub attractor_histogram: BTreeMap<String, usize>,
    /// Agreement sentences per verb number.
    pub label_balance: BTreeMap<String, usize>,
}

impl SplitStats {
    pub fn of(sentences: &[Sentence]) -> Self {
        let mut st = SplitStats {
            n_sentences: sentences.len(),
            ..SplitStats::default()
        };
        for s in sentences {
            if let Some(c) = count_attractors(s) {
                *st.attractor_histogram.entry(c.bucket()).or_default() += 1;
            }
            if let (true, Some(n)) = (s.has_agreement(), s.verb_number) {
                *st.label_balance.entry(n.to_string()).or_default() += 1;
            }
        }
        st
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub generator_seed: u64,
    pub splits: BTreeMap<String, SplitStats>,
}

/// Sentence counts of the train, validation and test splits.
pub fn split_sizes(n: usize, split: [f64; 3]) -> [usize; 3] {
    let train = ((n as f64) * split[0]).floor() as usize;
    let val = (((n as f64) * split[1]).floor() as usize).min(n - train);
    [train, val, n - train - val]
}

/// Generates the synthetic corpus into the data directory.
pub fn cmd_gen(cfg: &ExperimentConfig) -> Result<CorpusStats> {
    let dir = cfg.data_dir();
    create_dir(&dir)?;
    let d = &cfg.data;
    let mut rng = Rng::new(d.generator_seed);
    let all = generate_synthetic(&d.grammar, d.n_sentences, &mut rng)?;
    let sizes = split_sizes(all.len(), d.split);
    let mut stats = CorpusStats {
        generator_seed: d.generator_seed,
        splits: BTreeMap::new(),
    };
    let mut start = 0;
    for (name, size) in SPLITS.iter().zip(sizes) {
        let part = &all[start..start + size];
        start += size;
        write_jsonl(&dir.join(format!("{name}.jsonl")), part)?;
        stats.splits.insert(name.to_string(), SplitStats::of(part));
    }
    write_file(
        &dir.join("stats.json"),
        &(serde_json::to_string_pretty(&stats)? + "\n"),
    )?;
    Ok(stats)
}

#[derive(Clone, Debug, Default)]
pub struct Splits {
    pub train: Vec<Sentence>,
    pub val: Vec<Sentence>,
    pub test: Vec<Sentence>,
}

/// Reads the three splits, applying the configured intervening-noun filter.
pub fn load_splits(cfg: &ExperimentConfig) -> Result<Splits> {
    let dir = cfg.data_dir();
    let read = |name: &str| -> Result<Vec<Sentence>> {
        let s = read_jsonl(&dir.join(format!("{name}.jsonl")))?;
        Ok(if cfg.data.filter_intervening_noun {
            filter_intervening_noun(&s)
        } else {
            s
        })
    };
    Ok(Splits {
        train: read("train")?,
        val: read("val")?,
        test: read("test")?,
    })
}

fn tag_labels(spec: TaskSpec, s: &Sentence) -> Result<Vec<String>> {
    match spec {
        TaskSpec::Pos => Ok(s
            .pos
            .iter()
            .map(|p| strip_pos_number(p).to_string())
            .collect()),
        _ => s
            .supertags
            .clone()
            .ok_or_else(|| Error::Annotation("sentence has no supertags".into())),
    }
}

/// Model inputs and targets of one task over a split.
pub fn task_instances(
    spec: TaskSpec,
    sentences: &[Sentence],
    vocab: &Vocab,
    tags: Option<&TagInventory>,
) -> Result<Vec<TaskInstance>> {
    match spec {
        TaskSpec::Agreement => {
            let (inst, _) = extract_all(sentences, vocab);
            Ok(inst.iter().map(TaskInstance::agreement).collect())
        }
        TaskSpec::Lm => sentences
            .iter()
            .map(|s| Ok(TaskInstance::lm(replace_rare(s, vocab)?, vocab.eos_id())))
            .collect(),
        TaskSpec::Supertag | TaskSpec::Pos => {
            let inv =
                tags.ok_or_else(|| Error::Config("tagging task without a tag inventory".into()))?;
            sentences
                .iter()
                .map(|s| {
                    TaskInstance::tagging(
                        replace_rare(s, vocab)?,
                        inv.encode(&tag_labels(spec, s)?),
                    )
                })
                .collect()
        }
    }
}

fn tagging_spec(cfg: &ExperimentConfig) -> Option<TaskSpec> {
    cfg.train
        .tasks
        .iter()
        .copied()
        .find(|t| matches!(t, TaskSpec::Supertag | TaskSpec::Pos))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedMetricsRow {
    pub seed: u64,
    pub epoch: usize,
    pub task: String,
    pub train_loss: f64,
    pub val_metric: Option<f64>,
    pub wall_seconds: f64,
}

#[derive(Clone, Debug)]
pub struct TrainSummary {
    pub checkpoints: Vec<PathBuf>,
    pub metrics: Vec<SeedMetricsRow>,
}

fn vocab_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir().join("vocab.json")
}

fn tags_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out_dir().join("tags.json")
}

fn task_data(
    spec: TaskSpec,
    cfg: &ExperimentConfig,
    splits: &Splits,
    vocab: &Vocab,
    tags: Option<&TagInventory>,
) -> Result<TaskData> {
    let mut train = task_instances(spec, &splits.train, vocab, tags)?;
    if let (TaskSpec::Agreement, Some(n)) = (spec, cfg.data.agreement_train_size) {
        train.truncate(n);
    }
    let val = task_instances(spec, &splits.val, vocab, tags)?;
    TaskData::new(spec.task(), train, val, vocab.pad_id())
}

fn train_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    base: &ModelConfig,
    n_tags: usize,
    data: &[TaskData],
) -> Result<Vec<MetricsRow>> {
    let t = &cfg.train;
    let tc = t.train_config(seed, t.epochs);
    let head = |i: usize| t.tasks[i].task().head();
    let dir = cfg.seed_dir(seed);
    create_dir(&dir)?;
    let (mc, params, metrics) = match t.regime {
        Regime::Single => {
            let mc = base.with_heads(&[head(0)], n_tags)?;
            let out = train_single(init_params(&mc, seed)?, &data[0], &tc)?;
            (mc, out.params, out.metrics)
        }
        Regime::Joint => {
            let mc = base.with_heads(&[head(0), head(1)], n_tags)?;
            let out = train_joint(init_params(&mc, seed)?, &data[0], &data[1], &tc)?;
            (mc, out.params, out.metrics)
        }
        Regime::Pretrain => {
            let mc_a = base.with_heads(&[head(0)], n_tags)?;
            let mc_b = base.with_heads(&[head(1)], n_tags)?;
            let tc_a = t.train_config(seed, t.pretrain_epochs);
            let out = pretrain_then_train(
                init_params(&mc_a, seed)?,
                &data[0],
                &tc_a,
                init_params(&mc_b, seed)?,
                &data[1],
                &tc,
            )?;
            save_checkpoint(&out.phase_a, &mc_a, &dir.join("pretrain.ckpt.json"))?;
            (mc_b, out.params, out.metrics)
        }
    };
    save_checkpoint(&params, &mc, &cfg.checkpoint_path(seed))?;
    write_metrics_csv(&dir.join("metrics.csv"), &metrics)?;
    Ok(metrics)
}

/// Trains one model per seed and writes checkpoints, vocabulary, tag
/// inventory and per-epoch metrics under the output directory.
pub fn cmd_train(cfg: &ExperimentConfig) -> Result<TrainSummary> {
    let splits = load_splits(cfg)?;
    let out = cfg.out_dir();
    create_dir(&out)?;
    let vocab = crate::corpus::build_vocab(&splits.train, cfg.data.vocab);
    write_file(&vocab_path(cfg), &vocab.to_json()?)?;
    let tags = match tagging_spec(cfg) {
        Some(TaskSpec::Pos) => Some(pos_inventory(&splits.train, cfg.data.supertag_min_count)),
        Some(_) => Some(prune_supertags(&splits.train, cfg.data.supertag_min_count)?),
        None => None,
    };
    if let Some(inv) = &tags {
        write_file(&tags_path(cfg), &inv.to_json()?)?;
    }
    let n_tags = tags.as_ref().map_or(0, TagInventory::n_classes);
    let data: Vec<TaskData> = cfg
        .train
        .tasks
        .iter()
        .map(|&spec| task_data(spec, cfg, &splits, &vocab, tags.as_ref()))
        .collect::<Result<_>>()?;
    let first_head = cfg.train.tasks[0].task().head();
    let base = ModelConfig::new(cfg.model.d, vocab.len(), n_tags, &[first_head])?
        .with_vocab_hash(vocab.sha256());
    let mut summary = TrainSummary {
        checkpoints: Vec::new(),
        metrics: Vec::new(),
    };
    for &seed in &cfg.seeds {
        let rows = match train_seed(cfg, seed, &base, n_tags, &data) {
            Ok(r) => r,
            Err(e) => {
                let note = format!("seed {seed} failed; outputs for this seed are partial\n{e}\n");
                write_file(&cfg.seed_dir(seed).join("FAILED"), &note)?;
                return Err(e);
            }
        };
        summary.checkpoints.push(cfg.checkpoint_path(seed));
        summary
            .metrics
            .extend(rows.into_iter().map(|r| SeedMetricsRow {
                seed,
                epoch: r.epoch,
                task: r.task,
                train_loss: r.train_loss,
                val_metric: r.val_metric,
                wall_seconds: r.wall_seconds,
            }));
    }
    let rows: Vec<Vec<String>> = summary
        .metrics
        .iter()
        .map(|r| {
            vec![
                r.seed.to_string(),
                r.epoch.to_string(),
                r.task.clone(),
                fmt_value(r.train_loss),
                opt(r.val_metric),
                fmt_value(r.wall_seconds),
            ]
        })
        .collect();
    let header = [
        "seed",
        "epoch",
        "task",
        "train_loss",
        "val_metric",
        "wall_seconds",
    ];
    write_file(&out.join("metrics.csv"), &csv_text(&header, &rows)?)?;
    Ok(summary)
}

/// Loads the vocabulary written by `train`.
pub fn load_vocab(cfg: &ExperimentConfig) -> Result<Vocab> {
    Vocab::from_json(&read_file(&vocab_path(cfg))?)
}

/// Loads a checkpoint and checks it was trained on `vocab`.
pub fn load_compatible(path: &Path, vocab: &Vocab) -> Result<(ModelConfig, ModelParams)> {
    let (mc, params) = load_checkpoint(path)?;
    let want = vocab.sha256();
    match &mc.vocab_sha256 {
        Some(h) if *h == want && mc.vocab_size == vocab.len() => Ok((mc, params)),
        Some(h) => Err(Error::Compatibility(format!(
            "{} was trained on vocabulary {h}, data vocabulary is {want}",
            path.display()
        ))),
        None => Err(Error::Compatibility(format!(
            "{} carries no vocabulary fingerprint",
            path.display()
        ))),
    }
}

/// Short name of a checkpoint: its directory for `model.ckpt.json`, else its stem.
pub fn checkpoint_label(path: &Path) -> String {
    let stem = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
    if stem == "model.ckpt.json" {
        if let Some(p) = path
            .parent()
            .and_then(|p| p.file_name())
            .and_then(|s| s.to_str())
        {
            return p.to_string();
        }
    }
    stem.trim_end_matches(".json")
        .trim_end_matches(".ckpt")
        .to_string()
}

/// Labels naming checkpoints in reports; full paths when labels collide.
fn report_labels(checkpoints: &[PathBuf]) -> Vec<String> {
    let labels: Vec<String> = checkpoints.iter().map(|p| checkpoint_label(p)).collect();
    let mut sorted = labels.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() == labels.len() {
        labels
    } else {
        checkpoints
            .iter()
            .map(|p| p.display().to_string())
            .collect()
    }
}

fn verb_pairs(cfg: &ExperimentConfig) -> Vec<VerbPair> {
    let mut pairs = cfg.data.grammar.verb_pairs();
    for p in &cfg.eval.verb_pairs {
        if !pairs.contains(p) {
            pairs.push(p.clone());
        }
    }
    pairs
}

fn template_items(cfg: &ExperimentConfig) -> Result<Vec<TemplateItem>> {
    let mut items = Vec::new();
    for p in &cfg.eval.templates {
        items.extend(expand_templates(&TemplateSuite::load(&cfg.resolve(p))?)?);
    }
    Ok(items)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub reports: Vec<EvalReport>,
    pub psycholinguistic: Option<PsycholinguisticReport>,
}

impl EvalOutput {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Evaluates checkpoints on the test split and writes the report, its CSV
/// form and attractor, probe and template plots under `<out_dir>/eval`.
pub fn cmd_eval(cfg: &ExperimentConfig, checkpoints: &[PathBuf]) -> Result<EvalOutput> {
    if checkpoints.is_empty() {
        return Err(Error::Usage("eval needs at least one checkpoint".into()));
    }
    let vocab = load_vocab(cfg)?;
    let labels = report_labels(checkpoints);
    let models: Vec<(String, ModelConfig, ModelParams)> = checkpoints
        .iter()
        .zip(labels)
        .map(|(p, l)| load_compatible(p, &vocab).map(|(c, m)| (l, c, m)))
        .collect::<Result<_>>()?;
    let splits = load_splits(cfg)?;
    let (train_agr, _) = extract_all(&splits.train, &vocab);
    let (test_agr, _) = extract_all(&splits.test, &vocab);
    let baselines = eval_baselines(&train_agr, &test_agr, &splits.test)?;
    let needs_tags = models.iter().any(|m| m.1.has(Head::Supertag));
    let tagging = if needs_tags {
        let inv = TagInventory::from_json(&read_file(&tags_path(cfg))?)?;
        let spec = if cfg.uses_pos_tags() {
            TaskSpec::Pos
        } else {
            TaskSpec::Supertag
        };
        let train = task_instances(spec, &splits.train, &vocab, Some(&inv))?;
        let test = task_instances(spec, &splits.test, &vocab, Some(&inv))?;
        Some((inv, train, test))
    } else {
        None
    };
    let lm_test = task_instances(TaskSpec::Lm, &splits.test, &vocab, None)?;
    let pairs = verb_pairs(cfg);
    let items = template_items(cfg)?;
    let lexicon = PosLexicon::from_sentences(&splits.train);

    let mut out = EvalOutput::default();
    let mut agreement_models = Vec::new();
    let mut agreement_labels = Vec::new();
    for (label, mc, params) in &models {
        let mut r = EvalReport {
            checkpoint: label.clone(),
            baselines: Some(baselines.clone()),
            ..EvalReport::default()
        };
        if mc.has(Head::Agreement) {
            r.agreement = Some(eval_agreement(params, &test_agr)?);
            if !items.is_empty() {
                for c in
                    eval_psycholinguistic(std::slice::from_ref(params), &items, &vocab, &lexicon)?
                {
                    r.per_condition
                        .insert(format!("{}/{}", c.suite, c.condition), c.mean);
                }
            }
            agreement_models.push(params.clone());
            agreement_labels.push(label.clone());
        }
        if let (true, Some((inv, train, test))) = (mc.has(Head::Supertag), &tagging) {
            r.supertag = Some(eval_supertag(params, train, test, inv)?);
        }
        if mc.has(Head::Lm) {
            r.perplexity = Some(eval_perplexity(params, &lm_test)?);
            r.probes = Some(eval_probes(
                params,
                &test_agr,
                &splits.test,
                &vocab,
                &pairs,
            )?);
        }
        out.reports.push(r);
    }
    if !items.is_empty() && !agreement_models.is_empty() {
        out.psycholinguistic = Some(PsycholinguisticReport {
            checkpoints: agreement_labels,
            conditions: eval_psycholinguistic(&agreement_models, &items, &vocab, &lexicon)?,
        });
    }
    write_eval_outputs(cfg, &out)?;
    Ok(out)
}

fn mean_series(name: &str, per_model: &[Vec<Option<f64>>], k: usize) -> Series {
    let mut values = Vec::with_capacity(k);
    let mut errors = Vec::with_capacity(k);
    for j in 0..k {
        let col: Vec<f64> = per_model.iter().filter_map(|m| m[j]).collect();
        if col.is_empty() {
            values.push(None);
            errors.push(None);
        } else {
            let (m, s) = crate::eval::mean_std(&col);
            values.push(Some(m));
            errors.push(Some(s));
        }
    }
    Series::new(name, values).with_errors(errors)
}

fn write_eval_outputs(cfg: &ExperimentConfig, out: &EvalOutput) -> Result<()> {
    let dir = cfg.out_dir().join("eval");
    create_dir(&dir)?;
    write_file(&dir.join("report.json"), &out.to_json()?)?;
    let mut rows = Vec::new();
    for r in &out.reports {
        for (m, k, v) in r.rows() {
            rows.push(vec![r.checkpoint.clone(), m, k, fmt_value(v)]);
        }
    }
    write_file(
        &dir.join("report.csv"),
        &csv_text(&["checkpoint", "metric", "key", "value"], &rows)?,
    )?;

    let buckets: Vec<String> = ATTRACTOR_BUCKETS.iter().map(|s| s.to_string()).collect();
    let mut per_model = Vec::new();
    let mut series = Vec::new();
    for r in &out.reports {
        if let Some(a) = &r.agreement {
            let v: Vec<Option<f64>> = buckets.iter().map(|b| a.bucket_accuracy(b)).collect();
            series.push(Series::new(r.checkpoint.clone(), v.clone()));
            per_model.push(v);
        }
    }
    if !per_model.is_empty() {
        series.insert(0, mean_series("mean", &per_model, buckets.len()));
        let chart = Chart {
            title: "Agreement accuracy by number of attractors".into(),
            x_label: "number of attractors".into(),
            y_label: "accuracy".into(),
            categories: buckets.clone(),
            series,
            y_range: Some((0.0, 1.0)),
        };
        write_plot(&dir, "attractors", &chart, false)?;
    }

    let probe_reports: Vec<_> = out
        .reports
        .iter()
        .filter_map(|r| r.probes.as_ref())
        .collect();
    if !probe_reports.is_empty() {
        let mut cats = vec!["overall".to_string()];
        cats.extend(buckets.iter().cloned());
        let col = |a: &crate::eval::AgreementReport| -> Vec<Option<f64>> {
            let mut v = vec![(a.n > 0).then_some(a.overall_accuracy)];
            v.extend(buckets.iter().map(|b| a.bucket_accuracy(b)));
            v
        };
        let lexical: Vec<_> = probe_reports.iter().map(|p| col(&p.lexical)).collect();
        let pos: Vec<_> = probe_reports.iter().map(|p| col(&p.pos)).collect();
        let head: Vec<_> = probe_reports
            .iter()
            .filter_map(|p| p.agreement_head.as_ref().map(&col))
            .collect();
        let mut series = vec![
            mean_series("lexical probe", &lexical, cats.len()),
            mean_series("pos probe", &pos, cats.len()),
        ];
        if !head.is_empty() {
            series.push(mean_series("agreement head", &head, cats.len()));
        }
        let chart = Chart {
            title: "Language-model probes against the agreement head".into(),
            x_label: "number of attractors".into(),
            y_label: "accuracy".into(),
            categories: cats,
            series,
            y_range: Some((0.0, 1.0)),
        };
        write_plot(&dir, "probes", &chart, true)?;
    }

    if let Some(p) = &out.psycholinguistic {
        let mut suites: Vec<SuiteName> = p.conditions.iter().map(|c| c.suite).collect();
        suites.dedup();
        for suite in suites {
            let conds: Vec<_> = p.conditions.iter().filter(|c| c.suite == suite).collect();
            let cats: Vec<String> = conds.iter().map(|c| c.condition.to_string()).collect();
            let mut series =
                vec![
                    Series::new("mean", conds.iter().map(|c| Some(c.mean)).collect())
                        .with_errors(conds.iter().map(|c| Some(c.std)).collect()),
                ];
            for (m, name) in p.checkpoints.iter().enumerate() {
                series.push(Series::new(
                    name.clone(),
                    conds.iter().map(|c| c.per_model.get(m).copied()).collect(),
                ));
            }
            let chart = Chart {
                title: format!("Template suite {suite}"),
                x_label: "condition".into(),
                y_label: "accuracy".into(),
                categories: cats,
                series,
                y_range: Some((0.0, 1.0)),
            };
            write_plot(&dir, &format!("psycholinguistic-{suite}"), &chart, true)?;
        }
    }
    Ok(())
}

/// Word-by-word agreement-head output and hidden state on one preamble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub suite: SuiteName,
    pub condition: crate::eval::Condition,
    /// Number the next verb must carry.
    pub label: crate::corpus::Number,
    pub tokens: Vec<String>,
    /// Plural probability after each word.
    pub p_plural: Vec<f64>,
    /// Hidden state after each word.
    pub hidden: Vec<Vec<f64>>,
}

impl TraceRecord {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn name(&self) -> String {
        format!("{} {}", self.suite, self.condition)
    }
}

/// Traces one preamble.
pub fn trace_item(
    params: &ModelParams,
    item: &TemplateItem,
    vocab: &Vocab,
    lexicon: &PosLexicon,
) -> Result<TraceRecord> {
    let ids = encode_item(item, vocab, lexicon)?;
    let tr = encode(params, &ids)?;
    let mut p_plural = Vec::with_capacity(ids.len());
    let mut hidden = Vec::with_capacity(ids.len());
    for t in 0..ids.len() {
        p_plural.push(head_agreement(params, tr.h(t))?);
        hidden.push(tr.h(t).to_vec());
    }
    Ok(TraceRecord {
        suite: item.suite,
        condition: item.condition,
        label: item.label,
        tokens: item.words.iter().map(|w| w.text.clone()).collect(),
        p_plural,
        hidden,
    })
}

/// Traces every number configuration of the configured template frame and
/// writes `trace.csv` plus probability and unit plots under `<out_dir>/trace`.
pub fn cmd_trace(
    cfg: &ExperimentConfig,
    checkpoint: &Path,
    units: &[usize],
) -> Result<Vec<TraceRecord>> {
    let vocab = load_vocab(cfg)?;
    let (mc, params) = load_compatible(checkpoint, &vocab)?;
    if !mc.has(Head::Agreement) {
        return Err(Error::Config(format!(
            "{} has no agreement head to trace",
            checkpoint.display()
        )));
    }
    if let Some(&u) = units.iter().find(|&&u| u >= mc.d) {
        return Err(Error::Range(format!(
            "unit {u} does not exist in a model with d = {}",
            mc.d
        )));
    }
    let template = cfg
        .trace
        .template
        .as_ref()
        .ok_or_else(|| Error::Config("trace.template is not set".into()))?;
    let suite = TemplateSuite::load(&cfg.resolve(template))?;
    let items: Vec<TemplateItem> = expand_templates(&suite)?
        .into_iter()
        .filter(|i| i.frame == cfg.trace.frame)
        .collect();
    if items.is_empty() {
        return Err(Error::Config(format!(
            "trace.frame {} is not in a suite of {} frames",
            cfg.trace.frame,
            suite.frames.len()
        )));
    }
    let train = read_jsonl(&cfg.data_dir().join("train.jsonl"))?;
    let lexicon = PosLexicon::from_sentences(&train);
    let records: Vec<TraceRecord> = items
        .iter()
        .map(|i| trace_item(&params, i, &vocab, &lexicon))
        .collect::<Result<_>>()?;
    write_trace_outputs(cfg, &records, units, mc.d)?;
    Ok(records)
}

fn write_trace_outputs(
    cfg: &ExperimentConfig,
    records: &[TraceRecord],
    units: &[usize],
    d: usize,
) -> Result<()> {
    let dir = cfg.out_dir().join("trace");
    create_dir(&dir)?;
    let mut header: Vec<String> = [
        "suite",
        "condition",
        "position",
        "token",
        "p_plural",
        "expected",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..d).map(|u| format!("h{u}")));
    let mut rows = Vec::new();
    for r in records {
        for t in 0..r.len() {
            let mut row = vec![
                r.suite.to_string(),
                r.condition.to_string(),
                (t + 1).to_string(),
                r.tokens[t].clone(),
                fmt_value(r.p_plural[t]),
                fmt_value(r.label.as_label()),
            ];
            row.extend(r.hidden[t].iter().map(|v| fmt_value(*v)));
            rows.push(row);
        }
    }
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    write_file(&dir.join("trace.csv"), &csv_text(&h, &rows)?)?;

    let longest = records.iter().map(TraceRecord::len).max().unwrap_or(0);
    let cats: Vec<String> = (1..=longest).map(|t| t.to_string()).collect();
    let pad = |v: Vec<f64>| -> Vec<Option<f64>> {
        let mut o: Vec<Option<f64>> = v.into_iter().map(Some).collect();
        o.resize(longest, None);
        o
    };
    let mut series = Vec::new();
    for r in records {
        series.push(Series::new(r.name(), pad(r.p_plural.clone())));
    }
    for r in records {
        series.push(
            Series::new(
                format!("{} expected", r.name()),
                pad(vec![r.label.as_label(); r.len()]),
            )
            .dashed(),
        );
    }
    let chart = Chart {
        title: format!(
            "Plural probability after each word, frame {}",
            cfg.trace.frame
        ),
        x_label: "word position".into(),
        y_label: "p(plural)".into(),
        categories: cats.clone(),
        series,
        y_range: Some((0.0, 1.0)),
    };
    write_plot(&dir, "trace-p-plural", &chart, false)?;

    let mut series = Vec::new();
    for &u in units {
        for r in records {
            series.push(Series::new(
                format!("{} h{u}", r.name()),
                pad(r.hidden.iter().map(|h| h[u]).collect()),
            ));
        }
    }
    let chart = Chart {
        title: format!("Hidden unit activations, frame {}", cfg.trace.frame),
        x_label: "word position".into(),
        y_label: "activation".into(),
        categories: cats,
        series,
        y_range: Some((-1.0, 1.0)),
    };
    write_plot(&dir, "trace-units", &chart, false)
}
