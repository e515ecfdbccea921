//! Psycholinguistic template suites. Each frame has a subject and an
//! attractor slot, both number-marked, and expands to the four crossings
//! SS, SP, PS and PP. Object-relative frames also carry an inline embedded
//! verb `{sg|pl}` and yield two probe points: the embedded verb (agreeing
//! with the attractor) and the main-clause verb (agreeing with the subject).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{intervening_nouns, Number, Sentence, Vocab};
use crate::error::{Error, Result};
use crate::model::ModelParams;

use super::agreement::predict_plural;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModifierType {
    Prepositional,
    Relative,
    ObjectRelative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Prepositional,
    Relative,
    EmbeddedVerb,
    MainClauseVerb,
}

impl SuiteName {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Prepositional => "prepositional",
            SuiteName::Relative => "relative",
            SuiteName::EmbeddedVerb => "embedded_verb",
            SuiteName::MainClauseVerb => "main_clause_verb",
        }
    }
}

impl fmt::Display for SuiteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Subject and attractor numbers of one expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    SS,
    SP,
    PS,
    PP,
}

impl Condition {
    pub const ALL: [Condition; 4] = [Condition::SS, Condition::SP, Condition::PS, Condition::PP];

    pub fn subject(self) -> Number {
        match self {
            Condition::SS | Condition::SP => Number::Sg,
            Condition::PS | Condition::PP => Number::Pl,
        }
    }

    pub fn attractor(self) -> Number {
        match self {
            Condition::SS | Condition::PS => Number::Sg,
            Condition::SP | Condition::PP => Number::Pl,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Condition::SS => "SS",
            Condition::SP => "SP",
            Condition::PS => "PS",
            Condition::PP => "PP",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateFrame {
    pub modifier_type: ModifierType,
    pub subject_sg: String,
    pub subject_pl: String,
    pub attractor_sg: String,
    pub attractor_pl: String,
    /// Words separated by spaces. `{subject}` and `{attractor}` mark the
    /// slots, `{sg|pl}` an inline verb agreeing with the attractor, and
    /// `word/TAG` supplies a POS tag for out-of-vocabulary words.
    pub frame_text: String,
    /// True for lexical material written for this suite rather than quoted.
    #[serde(default)]
    pub filler: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateSuite {
    pub name: String,
    #[serde(rename = "frame", default)]
    pub frames: Vec<TemplateFrame>,
}

impl TemplateSuite {
    pub fn parse(text: &str) -> Result<Self> {
        let suite: TemplateSuite =
            toml::from_str(text).map_err(|e| Error::Template(e.to_string()))?;
        for (i, f) in suite.frames.iter().enumerate() {
            parse_frame(f).map_err(|e| Error::Template(format!("frame {}: {e}", i + 1)))?;
        }
        Ok(suite)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text).map_err(|e| Error::Template(format!("{}: {e}", path.display())))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateWord {
    pub text: String,
    pub pos: Option<String>,
}

/// One preamble and the number its next verb must carry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplateItem {
    pub suite: SuiteName,
    pub frame: usize,
    pub condition: Condition,
    pub words: Vec<TemplateWord>,
    pub label: Number,
    /// Nouns between the controller and the verb with the opposite number.
    pub attractors: usize,
}

impl TemplateItem {
    pub fn text(&self) -> String {
        self.words
            .iter()
            .map(|w| w.text.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

enum Piece {
    Word(String, Option<String>),
    Subject,
    Attractor,
    Verb(String, String),
}

const RELATIVIZERS: [&str; 3] = ["who", "which", "whom"];

fn parse_frame(f: &TemplateFrame) -> Result<Vec<Piece>> {
    for (slot, v) in [
        ("subject_sg", &f.subject_sg),
        ("subject_pl", &f.subject_pl),
        ("attractor_sg", &f.attractor_sg),
        ("attractor_pl", &f.attractor_pl),
    ] {
        if v.trim().is_empty() || v.contains(char::is_whitespace) {
            return Err(Error::Template(format!("{slot} must be a single word")));
        }
    }
    let mut pieces = Vec::new();
    for tok in f.frame_text.split_whitespace() {
        let piece = match tok {
            "{subject}" => Piece::Subject,
            "{attractor}" => Piece::Attractor,
            t if t.starts_with('{') && t.ends_with('}') => {
                let inner = &t[1..t.len() - 1];
                match inner.split_once('|') {
                    Some((sg, pl)) if !sg.is_empty() && !pl.is_empty() && !pl.contains('|') => {
                        Piece::Verb(sg.to_string(), pl.to_string())
                    }
                    _ => return Err(Error::Template(format!("malformed slot `{t}`"))),
                }
            }
            t => {
                let (w, pos) = match t.rsplit_once('/') {
                    Some((w, p)) if !w.is_empty() && !p.is_empty() => (w, Some(p.to_string())),
                    _ => (t, None),
                };
                let w = if RELATIVIZERS.contains(&w.to_lowercase().as_str()) {
                    "that"
                } else {
                    w
                };
                Piece::Word(w.to_string(), pos)
            }
        };
        pieces.push(piece);
    }
    let count = |pred: fn(&Piece) -> bool| pieces.iter().filter(|p| pred(p)).count();
    if count(|p| matches!(p, Piece::Subject)) != 1 {
        return Err(Error::Template(
            "frame needs exactly one {subject} slot".into(),
        ));
    }
    if count(|p| matches!(p, Piece::Attractor)) != 1 {
        return Err(Error::Template(
            "frame needs exactly one {attractor} slot".into(),
        ));
    }
    let subj = pieces.iter().position(|p| matches!(p, Piece::Subject));
    let attr = pieces.iter().position(|p| matches!(p, Piece::Attractor));
    if subj > attr {
        return Err(Error::Template(
            "the subject must precede the attractor".into(),
        ));
    }
    let verbs = count(|p| matches!(p, Piece::Verb(..)));
    match f.modifier_type {
        ModifierType::ObjectRelative => {
            let v = pieces.iter().position(|p| matches!(p, Piece::Verb(..)));
            if verbs != 1 || v < attr {
                return Err(Error::Template(
                    "object-relative frames need one {sg|pl} verb after the attractor".into(),
                ));
            }
        }
        _ if verbs != 0 => {
            return Err(Error::Template(
                "only object-relative frames take an inline verb".into(),
            ))
        }
        _ => {}
    }
    Ok(pieces)
}

fn noun_pos(n: Number) -> &'static str {
    match n {
        Number::Sg => "NN",
        Number::Pl => "NNS",
    }
}

fn make_item(
    suite: SuiteName,
    frame: usize,
    condition: Condition,
    words: Vec<TemplateWord>,
    subject_index: usize,
    label: Number,
) -> TemplateItem {
    let probe = Sentence {
        tokens: words
            .iter()
            .map(|w| w.text.clone())
            .chain(["<verb>".into()])
            .collect(),
        pos: words
            .iter()
            .map(|w| w.pos.clone().unwrap_or_default())
            .chain([label.verb_tag().to_string()])
            .collect(),
        supertags: None,
        subject_index: Some(subject_index),
        verb_index: Some(words.len()),
        verb_number: Some(label),
    };
    let attractors = intervening_nouns(&probe)
        .unwrap_or_default()
        .into_iter()
        .filter(|&n| n != label)
        .count();
    TemplateItem {
        suite,
        frame,
        condition,
        words,
        label,
        attractors,
    }
}

/// Four expansions per frame, and for object-relative frames four per
/// probe point. Frame numbers are 1-based.
pub fn expand_templates(suite: &TemplateSuite) -> Result<Vec<TemplateItem>> {
    let mut out = Vec::new();
    for (fi, frame) in suite.frames.iter().enumerate() {
        let pieces =
            parse_frame(frame).map_err(|e| Error::Template(format!("frame {}: {e}", fi + 1)))?;
        for cond in Condition::ALL {
            let (sn, an) = (cond.subject(), cond.attractor());
            let mut words = Vec::new();
            let (mut subj_at, mut attr_at) = (0, 0);
            let mut verb_at = None;
            for p in &pieces {
                let w = match p {
                    Piece::Word(w, pos) => TemplateWord {
                        text: w.clone(),
                        pos: pos.clone(),
                    },
                    Piece::Subject => {
                        subj_at = words.len();
                        let text = match sn {
                            Number::Sg => &frame.subject_sg,
                            Number::Pl => &frame.subject_pl,
                        };
                        TemplateWord {
                            text: text.clone(),
                            pos: Some(noun_pos(sn).into()),
                        }
                    }
                    Piece::Attractor => {
                        attr_at = words.len();
                        let text = match an {
                            Number::Sg => &frame.attractor_sg,
                            Number::Pl => &frame.attractor_pl,
                        };
                        TemplateWord {
                            text: text.clone(),
                            pos: Some(noun_pos(an).into()),
                        }
                    }
                    Piece::Verb(sg, pl) => {
                        verb_at = Some(words.len());
                        TemplateWord {
                            text: if an == Number::Sg {
                                sg.clone()
                            } else {
                                pl.clone()
                            },
                            pos: Some(an.verb_tag().into()),
                        }
                    }
                };
                words.push(w);
            }
            let suite_name = match frame.modifier_type {
                ModifierType::Prepositional => SuiteName::Prepositional,
                ModifierType::Relative => SuiteName::Relative,
                ModifierType::ObjectRelative => SuiteName::MainClauseVerb,
            };
            if let Some(v) = verb_at {
                let embedded = words[..v].to_vec();
                out.push(make_item(
                    SuiteName::EmbeddedVerb,
                    fi + 1,
                    cond,
                    embedded,
                    attr_at,
                    an,
                ));
            }
            out.push(make_item(suite_name, fi + 1, cond, words, subj_at, sn));
        }
    }
    Ok(out)
}

/// Most frequent POS tag of each word in a tagged corpus (ties lexicographic).
#[derive(Clone, Debug, Default)]
pub struct PosLexicon {
    best: HashMap<String, String>,
}

impl PosLexicon {
    pub fn from_sentences(sentences: &[Sentence]) -> Self {
        let mut counts: HashMap<&str, BTreeMap<&str, usize>> = HashMap::new();
        for s in sentences {
            for (w, p) in s.tokens.iter().zip(&s.pos) {
                *counts.entry(w).or_default().entry(p).or_default() += 1;
            }
        }
        let best = counts
            .into_iter()
            .map(|(w, m)| {
                let mut top = ("", 0usize);
                for (p, c) in m {
                    if c > top.1 {
                        top = (p, c);
                    }
                }
                (w.to_string(), top.0.to_string())
            })
            .collect();
        PosLexicon { best }
    }

    pub fn get(&self, word: &str) -> Option<&str> {
        self.best.get(word).map(String::as_str)
    }
}

/// Token ids of an item. Out-of-vocabulary words fall back to their inline
/// POS tag, then to their most frequent training POS.
pub fn encode_item(item: &TemplateItem, vocab: &Vocab, lexicon: &PosLexicon) -> Result<Vec<usize>> {
    item.words
        .iter()
        .map(|w| {
            if let Some(id) = vocab.word_id(&w.text) {
                return Ok(id);
            }
            let pos = w
                .pos
                .as_deref()
                .or_else(|| lexicon.get(&w.text))
                .ok_or_else(|| {
                    Error::Template(format!(
                        "no POS tag known for out-of-vocabulary word `{}`",
                        w.text
                    ))
                })?;
            vocab
                .tag_id(pos)
                .ok_or_else(|| Error::Template(format!("unknown POS tag `{pos}` for `{}`", w.text)))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub suite: SuiteName,
    pub condition: Condition,
    pub n_items: usize,
    /// Accuracy of each model, in the order given.
    pub per_model: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation across models; 0 for a single model.
    pub std: f64,
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Accuracy of item-level predictions grouped by suite and condition.
pub fn condition_accuracies(
    items: &[TemplateItem],
    predictions: &[Number],
) -> BTreeMap<(SuiteName, Condition), (usize, usize)> {
    let mut acc: BTreeMap<(SuiteName, Condition), (usize, usize)> = BTreeMap::new();
    for (item, &p) in items.iter().zip(predictions) {
        let e = acc.entry((item.suite, item.condition)).or_default();
        e.0 += usize::from(p == item.label);
        e.1 += 1;
    }
    acc
}

/// Agreement-head accuracy per suite and condition for every model, with
/// mean and population standard deviation across models.
pub fn eval_psycholinguistic(
    models: &[ModelParams],
    items: &[TemplateItem],
    vocab: &Vocab,
    lexicon: &PosLexicon,
) -> Result<Vec<ConditionResult>> {
    if models.is_empty() {
        return Err(Error::Config(
            "psycholinguistic evaluation needs at least one model".into(),
        ));
    }
    let encoded: Vec<Vec<usize>> = items
        .iter()
        .map(|i| encode_item(i, vocab, lexicon))
        .collect::<Result<_>>()?;
    let mut per_model = Vec::with_capacity(models.len());
    for m in models {
        let preds: Vec<Number> = encoded
            .iter()
            .map(|ids| predict_plural(m, ids).map(Number::from_p_plural))
            .collect::<Result<_>>()?;
        per_model.push(condition_accuracies(items, &preds));
    }
    let keys: Vec<(SuiteName, Condition)> = per_model[0].keys().copied().collect();
    Ok(keys
        .into_iter()
        .map(|k| {
            let accs: Vec<f64> = per_model
                .iter()
                .map(|m| {
                    let (c, n) = m[&k];
                    c as f64 / n as f64
                })
                .collect();
            let (mean, std) = mean_std(&accs);
            ConditionResult {
                suite: k.0,
                condition: k.1,
                n_items: per_model[0][&k].1,
                per_model: accs,
                mean,
                std,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
name = "demo"

[[frame]]
modifier_type = "prepositional"
subject_sg = "tape"
subject_pl = "tapes"
attractor_sg = "singer"
attractor_pl = "singers"
frame_text = "the demo {subject} from the popular rock {attractor}"

[[frame]]
modifier_type = "relative"
subject_sg = "tape"
subject_pl = "tapes"
attractor_sg = "singer"
attractor_pl = "singers"
frame_text = "the demo {subject} which promoted the popular rock {attractor}"

[[frame]]
modifier_type = "object_relative"
subject_sg = "player"
subject_pl = "players"
attractor_sg = "coach"
attractor_pl = "coaches"
frame_text = "the {subject} the {attractor} {likes|like}"
"#;

    #[test]
    fn expansions_and_relativizer() {
        let suite = TemplateSuite::parse(DEMO).unwrap();
        let items = expand_templates(&suite).unwrap();
        assert_eq!(items.len(), 4 + 4 + 8);
        let ps = items
            .iter()
            .find(|i| i.suite == SuiteName::Relative && i.condition == Condition::PS)
            .unwrap();
        assert_eq!(
            ps.text(),
            "the demo tapes that promoted the popular rock singer"
        );
        for i in &items {
            assert!(!i.words.iter().any(|w| w.text == "which"));
            let crossed = matches!(i.condition, Condition::SP | Condition::PS);
            let expected = if i.suite == SuiteName::EmbeddedVerb || !crossed {
                0
            } else {
                1
            };
            assert_eq!(i.attractors, expected, "{}", i.text());
        }
        let emb = items
            .iter()
            .find(|i| i.suite == SuiteName::EmbeddedVerb && i.condition == Condition::SP)
            .unwrap();
        assert_eq!(emb.text(), "the player the coaches");
        assert_eq!(emb.label, Number::Pl);
        let main = items
            .iter()
            .find(|i| i.suite == SuiteName::MainClauseVerb && i.condition == Condition::SP)
            .unwrap();
        assert_eq!(main.text(), "the player the coaches like");
        assert_eq!(main.label, Number::Sg);
    }

    #[test]
    fn malformed_frames_are_template_errors() {
        let bad = DEMO.replace("the demo {subject} from", "the demo from");
        assert!(matches!(
            TemplateSuite::parse(&bad),
            Err(Error::Template(_))
        ));
        let bad = DEMO.replace("{likes|like}", "likes");
        assert!(matches!(
            TemplateSuite::parse(&bad),
            Err(Error::Template(_))
        ));
        let bad = DEMO.replace("subject_sg = \"tape\"", "subject_sg = \"\"");
        assert!(matches!(
            TemplateSuite::parse(&bad),
            Err(Error::Template(_))
        ));
    }

    #[test]
    fn last_noun_heuristic_fails_every_crossed_prepositional_item() {
        let suite = TemplateSuite::parse(DEMO).unwrap();
        let items = expand_templates(&suite).unwrap();
        let preds: Vec<Number> = items
            .iter()
            .map(|i| {
                let pos = i
                    .words
                    .iter()
                    .rev()
                    .find_map(|w| w.pos.as_deref().and_then(crate::corpus::noun_number));
                pos.unwrap()
            })
            .collect();
        let acc = condition_accuracies(&items, &preds);
        assert_eq!(acc[&(SuiteName::Prepositional, Condition::SP)].0, 0);
        assert_eq!(acc[&(SuiteName::Prepositional, Condition::PS)].0, 0);
        assert_eq!(acc[&(SuiteName::Prepositional, Condition::SS)], (1, 1));
    }

    #[test]
    fn single_model_has_zero_std() {
        assert_eq!(mean_std(&[0.75]), (0.75, 0.0));
        let (m, s) = mean_std(&[0.5, 1.0]);
        assert_eq!(m, 0.75);
        assert_eq!(s, 0.25);
    }
}
