use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::agreement::{AgreementReport, BaselineReport, ATTRACTOR_BUCKETS};
use super::lm::ProbeReport;
use super::tagging::TaggingReport;
use super::templates::ConditionResult;

/// Everything measured for one checkpoint.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub checkpoint: String,
    pub agreement: Option<AgreementReport>,
    pub baselines: Option<BaselineReport>,
    pub supertag: Option<TaggingReport>,
    pub perplexity: Option<f64>,
    pub probes: Option<ProbeReport>,
    /// Keys are `suite/condition`.
    pub per_condition: BTreeMap<String, f64>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    /// Flat `metric,key,value` rows.
    pub fn rows(&self) -> Vec<(String, String, f64)> {
        let mut rows: Vec<(String, String, f64)> = Vec::new();
        let mut push = |m: &str, k: &str, v: f64| rows.push((m.to_string(), k.to_string(), v));
        if let Some(a) = &self.agreement {
            push("agreement_accuracy", "overall", a.overall_accuracy);
            for b in ATTRACTOR_BUCKETS {
                if let Some(s) = a.accuracy_by_attractor.get(b) {
                    push("agreement_accuracy", b, s.accuracy);
                    push("agreement_n", b, s.n as f64);
                }
            }
            if let Some(m) = a.mixed_bucket {
                push("agreement_accuracy", "MIXED", m.accuracy);
                push("agreement_n", "MIXED", m.n as f64);
            }
        }
        if let Some(b) = &self.baselines {
            push("baseline_accuracy", "majority", b.majority_accuracy);
            push("baseline_accuracy", "last_noun", b.last_noun_accuracy);
            push(
                "baseline_abstained",
                "last_noun",
                b.last_noun_abstained as f64,
            );
        }
        if let Some(t) = &self.supertag {
            push("supertag_accuracy", "model", t.accuracy);
            push(
                "supertag_accuracy",
                "majority_per_word",
                t.majority_per_word_accuracy,
            );
        }
        if let Some(p) = self.perplexity {
            push("perplexity", "test", p);
        }
        if let Some(p) = &self.probes {
            push("probe_accuracy", "lexical", p.lexical.overall_accuracy);
            push("probe_accuracy", "pos", p.pos.overall_accuracy);
            if let Some(a) = &p.agreement_head {
                push("probe_accuracy", "agreement_head", a.overall_accuracy);
            }
            push("probe_undefined", "lexical", p.undefined as f64);
        }
        for (k, v) in &self.per_condition {
            push("condition_accuracy", k, *v);
        }
        rows
    }
}

/// Aggregate template results across checkpoints.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PsycholinguisticReport {
    pub checkpoints: Vec<String>,
    pub conditions: Vec<ConditionResult>,
}
