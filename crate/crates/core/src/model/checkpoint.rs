//! Versioned JSON checkpoints. Floats are written with 17 significant digits
//! so that a save/load cycle reproduces every bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::error::{Error, Result};
use crate::numeric::Matrix;

use super::config::{Head, ModelConfig};
use super::params::ModelParams;

pub const FORMAT_VERSION: u64 = 1;
pub const LABEL_CONVENTION: &str = "plural=1";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigRecord {
    d: usize,
    vocab_size: usize,
    n_supertags: usize,
    heads: Vec<Head>,
    label_convention: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vocab_sha256: Option<String>,
}

#[derive(Serialize)]
struct TensorOut {
    shape: [usize; 2],
    data: Box<RawValue>,
}

#[derive(Serialize)]
struct CheckpointOut {
    format_version: u64,
    config: ConfigRecord,
    tensors: BTreeMap<&'static str, TensorOut>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorIn {
    shape: Vec<usize>,
    data: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointIn {
    #[serde(rename = "format_version")]
    _format_version: u64,
    config: ConfigRecord,
    tensors: BTreeMap<String, TensorIn>,
}

fn format_data(values: &[f64]) -> String {
    let mut s = String::with_capacity(values.len() * 24 + 2);
    s.push('[');
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("{v:.16e}"));
    }
    s.push(']');
    s
}

pub fn checkpoint_to_string(params: &ModelParams, cfg: &ModelConfig) -> Result<String> {
    check_shapes(params, cfg)?;
    let mut tensors = BTreeMap::new();
    for (name, t) in params.tensors() {
        let data = RawValue::from_string(format_data(t.data()))?;
        tensors.insert(
            name,
            TensorOut {
                shape: [t.rows(), t.cols()],
                data,
            },
        );
    }
    let doc = CheckpointOut {
        format_version: FORMAT_VERSION,
        config: ConfigRecord {
            d: cfg.d,
            vocab_size: cfg.vocab_size,
            n_supertags: cfg.n_supertags,
            heads: cfg.heads.clone(),
            label_convention: LABEL_CONVENTION.into(),
            vocab_sha256: cfg.vocab_sha256.clone(),
        },
        tensors,
    };
    let mut out = serde_json::to_string_pretty(&doc)?;
    out.push('\n');
    Ok(out)
}

pub fn save_checkpoint(params: &ModelParams, cfg: &ModelConfig, path: &Path) -> Result<()> {
    let text = checkpoint_to_string(params, cfg)?;
    fs::write(path, text).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

pub fn checkpoint_from_str(text: &str) -> Result<(ModelConfig, ModelParams)> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::CheckpointMalformed(e.to_string()))?;
    let version = value
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::CheckpointMalformed("missing format_version".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::CheckpointVersion {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let doc: CheckpointIn =
        serde_json::from_str(text).map_err(|e| Error::CheckpointMalformed(e.to_string()))?;
    if doc.config.label_convention != LABEL_CONVENTION {
        return Err(Error::CheckpointMalformed(format!(
            "label convention `{}` is not `{LABEL_CONVENTION}`",
            doc.config.label_convention
        )));
    }
    let mut cfg = ModelConfig::new(
        doc.config.d,
        doc.config.vocab_size,
        doc.config.n_supertags,
        &doc.config.heads,
    )
    .map_err(|e| Error::CheckpointMalformed(e.to_string()))?;
    cfg.vocab_sha256 = doc.config.vocab_sha256;
    let mut params = ModelParams::zeros(&cfg);
    let mut tensors = doc.tensors;
    for (name, slot) in params.tensors_mut() {
        let t = tensors
            .remove(name)
            .ok_or_else(|| Error::CheckpointMalformed(format!("missing tensor `{name}`")))?;
        let expected = vec![slot.rows(), slot.cols()];
        if t.shape != expected || t.data.len() != slot.len() {
            let found = if t.shape != expected {
                t.shape
            } else {
                vec![t.data.len()]
            };
            return Err(Error::CheckpointShape {
                tensor: name.to_string(),
                found,
                expected,
            });
        }
        *slot = Matrix::from_vec(expected[0], expected[1], t.data)?;
    }
    if let Some(extra) = tensors.keys().next() {
        return Err(Error::CheckpointMalformed(format!(
            "unexpected tensor `{extra}`"
        )));
    }
    Ok((cfg, params))
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelConfig, ModelParams)> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    checkpoint_from_str(&text)
}

fn check_shapes(params: &ModelParams, cfg: &ModelConfig) -> Result<()> {
    let expected = ModelParams::zeros(cfg);
    let want = expected.tensors();
    let have = params.tensors();
    if want.len() != have.len() {
        return Err(Error::Shape(
            "parameter heads do not match configuration".into(),
        ));
    }
    for ((n, a), (_, b)) in want.iter().zip(&have) {
        if a.shape() != b.shape() {
            return Err(Error::Shape(format!(
                "tensor `{n}` is {:?}, configuration needs {:?}",
                b.shape(),
                a.shape()
            )));
        }
    }
    Ok(())
}
