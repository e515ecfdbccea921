//! Baselines, per-attractor agreement accuracy, tagging accuracy,
//! perplexity, language-model grammaticality probes and template suites.
//!
//! Decisions are thresholded at exactly 0.5, with ties resolving to plural
//! for the agreement head and to "correct" for the probes.

mod agreement;
mod lm;
mod report;
mod tagging;
mod templates;

pub use agreement::{
    baseline_last_noun, baseline_majority, bucket_report, eval_agreement, eval_baselines,
    predict_agreement, predict_plural, AgreementReport, BaselineReport, BucketStat,
    ATTRACTOR_BUCKETS,
};
pub use lm::{
    eval_perplexity, eval_probes, lm_bits, probe_lexical, probe_pos, resolve_pair, ProbeReport,
};
pub use report::{EvalReport, PsycholinguisticReport};
pub use tagging::{eval_supertag, MajorityTagger, TaggingReport};
pub use templates::{
    condition_accuracies, encode_item, eval_psycholinguistic, expand_templates, mean_std,
    Condition, ConditionResult, ModifierType, PosLexicon, SuiteName, TemplateFrame, TemplateItem,
    TemplateSuite, TemplateWord,
};
