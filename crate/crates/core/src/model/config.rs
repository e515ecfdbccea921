use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Head {
    Agreement,
    Supertag,
    Lm,
}

impl Head {
    pub fn name(self) -> &'static str {
        match self {
            Head::Agreement => "agreement",
            Head::Supertag => "supertag",
            Head::Lm => "lm",
        }
    }
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Architecture hyper-parameters. Embedding width equals the LSTM width `d`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d: usize,
    pub vocab_size: usize,
    /// Size of the tag head output; 0 when the supertag head is absent.
    pub n_supertags: usize,
    pub heads: Vec<Head>,
    /// Fingerprint of the vocabulary the embedding rows are indexed by.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vocab_sha256: Option<String>,
}

impl ModelConfig {
    pub fn new(d: usize, vocab_size: usize, n_supertags: usize, heads: &[Head]) -> Result<Self> {
        let mut heads = heads.to_vec();
        heads.sort();
        heads.dedup();
        let cfg = ModelConfig {
            d,
            vocab_size,
            n_supertags: if heads.contains(&Head::Supertag) {
                n_supertags
            } else {
                0
            },
            heads,
            vocab_sha256: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::Config("model dimension d must be at least 1".into()));
        }
        if self.vocab_size < 2 {
            return Err(Error::Config("vocab_size must be at least 2".into()));
        }
        if self.heads.is_empty() {
            return Err(Error::Config("at least one head is required".into()));
        }
        if self.heads.contains(&Head::Supertag) && self.n_supertags == 0 {
            return Err(Error::Config("supertag head needs n_supertags >= 1".into()));
        }
        if !self.heads.contains(&Head::Supertag) && self.n_supertags != 0 {
            return Err(Error::Config(
                "n_supertags set without a supertag head".into(),
            ));
        }
        Ok(())
    }

    pub fn has(&self, head: Head) -> bool {
        self.heads.contains(&head)
    }

    /// Same encoder shape, different heads.
    pub fn with_heads(&self, heads: &[Head], n_supertags: usize) -> Result<Self> {
        let mut c = ModelConfig::new(self.d, self.vocab_size, n_supertags, heads)?;
        c.vocab_sha256 = self.vocab_sha256.clone();
        Ok(c)
    }

    pub fn with_vocab_hash(mut self, sha256: impl Into<String>) -> Self {
        self.vocab_sha256 = Some(sha256.into());
        self
    }
}
