use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{GrammarConfig, VerbPair, VocabRule};
use crate::error::{Error, Result};
use crate::train::{Task, TrainConfig};

pub const SCHEMA_VERSION: u32 = 1;

/// A task as named in configuration files. `pos` trains the tagging head on
/// number-stripped POS tags instead of supertags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskSpec {
    Agreement,
    Supertag,
    Pos,
    Lm,
}

impl TaskSpec {
    pub fn task(self) -> Task {
        match self {
            TaskSpec::Agreement => Task::Agreement,
            TaskSpec::Supertag | TaskSpec::Pos => Task::Supertag,
            TaskSpec::Lm => Task::Lm,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Single,
    Joint,
    Pretrain,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    /// Directory holding `train.jsonl`, `val.jsonl` and `test.jsonl`. When
    /// unset, `gen` writes generated data to `<out_dir>/data`.
    pub dir: Option<PathBuf>,
    pub n_sentences: usize,
    /// Train, validation and test fractions.
    pub split: [f64; 3],
    pub generator_seed: u64,
    pub grammar: GrammarConfig,
    pub vocab: VocabRule,
    pub supertag_min_count: usize,
    /// Keep only sentences with a noun between subject and verb.
    pub filter_intervening_noun: bool,
    /// Use only the first `n` agreement instances of the training split.
    pub agreement_train_size: Option<usize>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            dir: None,
            n_sentences: 20_000,
            split: [0.8, 0.1, 0.1],
            generator_seed: 7,
            grammar: GrammarConfig::default(),
            vocab: VocabRule::MinCount(1),
            supertag_min_count: 10,
            filter_intervening_noun: false,
            agreement_train_size: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSection {
    pub d: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection { d: 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub regime: Regime,
    /// One task for `single`; first and second task otherwise.
    pub tasks: Vec<TaskSpec>,
    /// Weight ratio of the second task; required for `joint`.
    pub r: Option<f64>,
    pub epochs: usize,
    /// Epochs of the first phase of `pretrain`.
    pub pretrain_epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub shuffle: bool,
    pub max_grad_norm: Option<f64>,
    pub freeze_embeddings: bool,
    pub wall_clock: bool,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            regime: Regime::Single,
            tasks: vec![TaskSpec::Agreement],
            r: None,
            epochs: t.epochs,
            pretrain_epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            shuffle: t.shuffle,
            max_grad_norm: t.max_grad_norm,
            freeze_embeddings: t.freeze_embeddings,
            wall_clock: t.wall_clock,
        }
    }
}

impl TrainSection {
    /// Training parameters for `seed`, with `epochs` for the phase at hand.
    pub fn train_config(&self, seed: u64, epochs: usize) -> TrainConfig {
        TrainConfig {
            epochs,
            batch_size: self.batch_size,
            learning_rate: self.learning_rate,
            seed,
            shuffle: self.shuffle,
            r: self.r.unwrap_or(0.0),
            max_grad_norm: self.max_grad_norm,
            freeze_embeddings: self.freeze_embeddings,
            wall_clock: self.wall_clock,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSection {
    /// Template suite files, relative to the configuration file.
    pub templates: Vec<PathBuf>,
    /// Verb pairs for the lexical probe in addition to the grammar's own.
    pub verb_pairs: Vec<VerbPair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceSection {
    /// Template suite whose frame is traced, relative to the configuration file.
    pub template: Option<PathBuf>,
    /// 1-based frame number within the suite.
    pub frame: usize,
    /// Hidden units whose activations are plotted.
    pub units: Vec<usize>,
}

impl Default for TraceSection {
    fn default() -> Self {
        TraceSection {
            template: None,
            frame: 1,
            units: vec![0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub out_dir: PathBuf,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub data: DataConfig,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub trace: TraceSection,
    /// Directory relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::parse(&text, &base).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("seeds must list at least one seed".into()));
        }
        let d = &self.data;
        if d.split.iter().any(|f| f.is_nan() || *f < 0.0)
            || (d.split.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::Config(
                "data.split must be three non-negative fractions summing to 1".into(),
            ));
        }
        d.grammar.validate()?;
        if d.supertag_min_count == 0 {
            return Err(Error::Config(
                "data.supertag_min_count must be at least 1".into(),
            ));
        }
        if self.model.d == 0 {
            return Err(Error::Config("model.d must be at least 1".into()));
        }
        let t = &self.train;
        let want = match t.regime {
            Regime::Single => 1,
            Regime::Joint | Regime::Pretrain => 2,
        };
        if t.tasks.len() != want {
            return Err(Error::Config(format!(
                "train.tasks must name {want} task(s) for the {:?} regime",
                t.regime
            )));
        }
        if want == 2 && t.tasks[0].task() == t.tasks[1].task() {
            return Err(Error::Config(
                "train.tasks must name two different heads".into(),
            ));
        }
        if t.regime == Regime::Joint && t.r.is_none() {
            return Err(Error::Config("the joint regime requires train.r".into()));
        }
        if t.tasks.contains(&TaskSpec::Supertag) && t.tasks.contains(&TaskSpec::Pos) {
            return Err(Error::Config("supertag and pos share one head".into()));
        }
        let tc = t.train_config(self.seeds[0], t.epochs.max(1));
        tc.validate()?;
        if t.regime == Regime::Pretrain && t.pretrain_epochs == 0 {
            return Err(Error::Config(
                "train.pretrain_epochs must be at least 1".into(),
            ));
        }
        if t.regime != Regime::Pretrain && t.epochs == 0 {
            return Err(Error::Config("train.epochs must be at least 1".into()));
        }
        if self.trace.frame == 0 {
            return Err(Error::Config("trace.frame is 1-based".into()));
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out_dir)
    }

    pub fn data_dir(&self) -> PathBuf {
        match &self.data.dir {
            Some(d) => self.resolve(d),
            None => self.out_dir().join("data"),
        }
    }

    pub fn seed_dir(&self, seed: u64) -> PathBuf {
        self.out_dir().join(format!("seed-{seed}"))
    }

    pub fn checkpoint_path(&self, seed: u64) -> PathBuf {
        self.seed_dir(seed).join("model.ckpt.json")
    }

    /// Tag labels for the tagging head: supertags unless a `pos` task is configured.
    pub fn uses_pos_tags(&self) -> bool {
        self.train.tasks.contains(&TaskSpec::Pos)
    }
}
