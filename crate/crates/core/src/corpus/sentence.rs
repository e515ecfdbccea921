use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grammatical number. Plural is the positive class of the agreement head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Number {
    #[serde(rename = "SG")]
    Sg,
    #[serde(rename = "PL")]
    Pl,
}

impl Number {
    pub fn opposite(self) -> Number {
        match self {
            Number::Sg => Number::Pl,
            Number::Pl => Number::Sg,
        }
    }

    pub fn as_label(self) -> f64 {
        match self {
            Number::Sg => 0.0,
            Number::Pl => 1.0,
        }
    }

    /// Decision rule shared by every agreement predictor: `p ≥ 0.5` is plural.
    pub fn from_p_plural(p: f64) -> Number {
        if p >= 0.5 {
            Number::Pl
        } else {
            Number::Sg
        }
    }

    pub fn verb_tag(self) -> &'static str {
        match self {
            Number::Sg => "VBZ",
            Number::Pl => "VBP",
        }
    }

    pub fn letter(self) -> char {
        match self {
            Number::Sg => 'S',
            Number::Pl => 'P',
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Number::Sg => "SG",
            Number::Pl => "PL",
        })
    }
}

/// Number of a noun POS tag; pronouns and other tags are not nouns.
pub fn noun_number(pos: &str) -> Option<Number> {
    match pos {
        "NN" | "NNP" => Some(Number::Sg),
        "NNS" | "NNPS" => Some(Number::Pl),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sentence {
    pub tokens: Vec<String>,
    pub pos: Vec<String>,
    pub supertags: Option<Vec<String>>,
    pub subject_index: Option<usize>,
    pub verb_index: Option<usize>,
    pub verb_number: Option<Number>,
}

impl Sentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn has_agreement(&self) -> bool {
        self.subject_index.is_some() && self.verb_index.is_some() && self.verb_number.is_some()
    }

    /// Number of the grammatical subject: its noun tag, or the verb number
    /// when the subject is not tagged as a noun.
    pub fn subject_number(&self) -> Option<Number> {
        let s = self.subject_index?;
        noun_number(&self.pos[s]).or(self.verb_number)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        if n == 0 {
            return Err(Error::Annotation("sentence has no tokens".into()));
        }
        if self.pos.len() != n {
            return Err(Error::Annotation(format!(
                "{} tokens but {} POS tags",
                n,
                self.pos.len()
            )));
        }
        if let Some(st) = &self.supertags {
            if st.len() != n {
                return Err(Error::Annotation(format!(
                    "{} tokens but {} supertags",
                    n,
                    st.len()
                )));
            }
        }
        if let Some(s) = self.subject_index {
            if s >= n {
                return Err(Error::Annotation(format!("subject_index {s} out of range")));
            }
        }
        if let Some(v) = self.verb_index {
            if v >= n {
                return Err(Error::Annotation(format!("verb_index {v} out of range")));
            }
            let tag = self.pos[v].as_str();
            let implied = match tag {
                "VBZ" => Number::Sg,
                "VBP" => Number::Pl,
                other => {
                    return Err(Error::Annotation(format!(
                        "verb at index {v} is tagged {other}, expected VBZ or VBP"
                    )))
                }
            };
            if let Some(num) = self.verb_number {
                if num != implied {
                    return Err(Error::Annotation(format!(
                        "verb_number {num} contradicts POS {tag}"
                    )));
                }
            }
            if let Some(s) = self.subject_index {
                if s >= v {
                    return Err(Error::Annotation(format!(
                        "subject_index {s} must precede verb_index {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}
