//! Config-driven commands behind the `gen`, `train`, `eval` and `trace`
//! verbs. Every command is a pure function of its configuration, input
//! files and seed list, and every plot is written next to a CSV holding
//! exactly the plotted numbers.

mod commands;
mod config;
pub mod svg;

pub use commands::{
    checkpoint_label, cmd_eval, cmd_gen, cmd_trace, cmd_train, load_compatible, load_splits,
    load_vocab, split_sizes, task_instances, trace_item, CorpusStats, EvalOutput, SeedMetricsRow,
    SplitStats, Splits, TraceRecord, TrainSummary, SPLITS,
};
pub use config::{
    DataConfig, EvalSection, ExperimentConfig, ModelSection, Regime, TaskSpec, TraceSection,
    TrainSection, SCHEMA_VERSION,
};
