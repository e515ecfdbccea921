//! Template grammar producing fully annotated English-like sentences with a
//! controlled number of agreement attractors.
//!
//! A sentence is an optional fronted prepositional phrase, a subject noun
//! phrase, a chain of noun-bearing modifiers (prepositional phrases,
//! coordinated nouns, subject relatives with a past-tense verb, and a final
//! object relative whose verb agrees with the relative-clause subject), the
//! main verb and a short continuation. Supertags come from a fixed toy CCG
//! inventory and are assigned by the rule that produced each word.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Rng;

use super::agreement::count_attractors;
use super::sentence::{Number, Sentence};

/// Fixed toy supertag inventory (30 categories).
pub const TOY_SUPERTAGS: [&str; 30] = [
    "NP/N",
    "(S/(S\\NP))/N",
    "N/N",
    "N",
    "(NP\\NP)/NP",
    "(S/S)/NP",
    ",",
    "(NP\\NP)/(S[dcl]\\NP)",
    "(NP\\NP)/(S[dcl]/NP)",
    "(S[dcl]\\NP)/NP",
    "S[dcl]\\NP",
    "(S[dcl]\\NP)/(S[adj]\\NP)",
    "S[adj]\\NP",
    "(S\\NP)\\(S\\NP)",
    ".",
    "conj",
    "NP",
    "PP/NP",
    "(S[dcl]\\NP)/PP",
    "((S\\NP)\\(S\\NP))/NP",
    "(S[dcl]\\NP)/S[em]",
    "S[em]/S[dcl]",
    "(S[b]\\NP)/NP",
    "(S[to]\\NP)/(S[b]\\NP)",
    "N/PP",
    "(N\\N)/NP",
    "S/S",
    "(S[pss]\\NP)/PP",
    "(S[ng]\\NP)/NP",
    "NP[nb]/N",
];

const DET_OBJ: &str = "NP/N";
const DET_SUBJ: &str = "(S/(S\\NP))/N";
const ADJ: &str = "N/N";
const NOUN: &str = "N";
const PREP_NOUN: &str = "(NP\\NP)/NP";
const PREP_FRONT: &str = "(S/S)/NP";
const COMMA: &str = ",";
const REL_SUBJ: &str = "(NP\\NP)/(S[dcl]\\NP)";
const REL_OBJ: &str = "(NP\\NP)/(S[dcl]/NP)";
const VERB_TRANS: &str = "(S[dcl]\\NP)/NP";
const VERB_INTRANS: &str = "S[dcl]\\NP";
const VERB_COPULA: &str = "(S[dcl]\\NP)/(S[adj]\\NP)";
const ADJ_PRED: &str = "S[adj]\\NP";
const ADVERB: &str = "(S\\NP)\\(S\\NP)";
const PERIOD: &str = ".";
const CONJ: &str = "conj";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NounEntry {
    pub singular: String,
    pub plural: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerbFrame {
    Intransitive,
    Transitive,
    Copula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerbEntry {
    pub singular: String,
    pub plural: String,
    pub frame: VerbFrame,
}

/// Singular/plural forms of a present-tense verb.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerbPair {
    pub singular: String,
    pub plural: String,
}

impl VerbPair {
    pub fn form(&self, n: Number) -> &str {
        match n {
            Number::Sg => &self.singular,
            Number::Pl => &self.plural,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModifierKind {
    Prepositional,
    Relative,
    ObjectRelative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModifierWeights {
    pub prepositional: f64,
    pub relative: f64,
    pub object_relative: f64,
}

impl Default for ModifierWeights {
    fn default() -> Self {
        ModifierWeights {
            prepositional: 0.55,
            relative: 0.3,
            object_relative: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrammarConfig {
    pub nouns: Vec<NounEntry>,
    pub adjectives: Vec<String>,
    pub prepositions: Vec<String>,
    pub fronted_prepositions: Vec<String>,
    /// Past-tense transitive verbs used inside subject relatives.
    pub past_verbs: Vec<String>,
    /// Present-tense transitive verbs used inside object relatives.
    pub embedded_verbs: Vec<VerbEntry>,
    pub verbs: Vec<VerbEntry>,
    pub predicate_adjectives: Vec<String>,
    pub adverbs: Vec<String>,
    /// Relative weights of exactly 0, 1, 2, 3 and 4 attractors.
    pub attractor_weights: [f64; 5],
    /// Weight of sentences with intervening nouns of mixed number.
    pub mixed_weight: f64,
    pub plural_subject_prob: f64,
    pub modifier_weights: ModifierWeights,
    /// Chance that a further intervening noun is coordinated ("and the N")
    /// with the previous prepositional object rather than opening a new modifier.
    pub coordination_prob: f64,
    /// Chance that an object relative omits "that".
    pub reduced_relative_prob: f64,
    pub fronted_pp_prob: f64,
    /// Chance of each of up to two prenominal adjectives.
    pub adjective_prob: f64,
    /// Use only this modifier kind when set.
    pub force_modifier: Option<ModifierKind>,
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn nouns(list: &[(&str, &str)]) -> Vec<NounEntry> {
    list.iter()
        .map(|&(s, p)| NounEntry {
            singular: s.into(),
            plural: p.into(),
        })
        .collect()
}

fn verbs(list: &[(&str, &str, VerbFrame)]) -> Vec<VerbEntry> {
    list.iter()
        .map(|&(s, p, frame)| VerbEntry {
            singular: s.into(),
            plural: p.into(),
            frame,
        })
        .collect()
}

impl Default for GrammarConfig {
    fn default() -> Self {
        use VerbFrame::*;
        GrammarConfig {
            nouns: nouns(&[
                ("tape", "tapes"),
                ("singer", "singers"),
                ("player", "players"),
                ("coach", "coaches"),
                ("number", "numbers"),
                ("ratio", "ratios"),
                ("man", "men"),
                ("woman", "women"),
                ("child", "children"),
                ("teacher", "teachers"),
                ("student", "students"),
                ("author", "authors"),
                ("book", "books"),
                ("editor", "editors"),
                ("manager", "managers"),
                ("company", "companies"),
                ("artist", "artists"),
                ("painting", "paintings"),
                ("officer", "officers"),
                ("farmer", "farmers"),
                ("letter", "letters"),
                ("report", "reports"),
                ("doctor", "doctors"),
                ("nurse", "nurses"),
                ("driver", "drivers"),
                ("key", "keys"),
                ("cabinet", "cabinets"),
                ("senator", "senators"),
                ("band", "bands"),
                ("song", "songs"),
            ]),
            adjectives: words(&[
                "demo", "popular", "rock", "old", "new", "young", "famous", "local", "small",
                "strange",
            ]),
            prepositions: words(&["from", "of", "to", "near", "with", "behind", "about", "for"]),
            fronted_prepositions: words(&["in", "after", "during"]),
            past_verbs: words(&[
                "promoted", "praised", "visited", "admired", "helped", "watched", "called",
                "trained",
            ]),
            embedded_verbs: verbs(&[
                ("likes", "like", Transitive),
                ("praises", "praise", Transitive),
                ("admires", "admire", Transitive),
                ("knows", "know", Transitive),
                ("trusts", "trust", Transitive),
                ("meets", "meet", Transitive),
            ]),
            verbs: verbs(&[
                ("is", "are", Copula),
                ("seems", "seem", Copula),
                ("remains", "remain", Copula),
                ("has", "have", Transitive),
                ("wants", "want", Transitive),
                ("visits", "visit", Transitive),
                ("sings", "sing", Intransitive),
                ("wins", "win", Intransitive),
                ("waits", "wait", Intransitive),
                ("smiles", "smile", Intransitive),
            ]),
            predicate_adjectives: words(&[
                "clear",
                "ready",
                "happy",
                "important",
                "late",
                "busy",
                "right",
                "tired",
            ]),
            adverbs: words(&["today", "again", "here", "often"]),
            attractor_weights: [0.45, 0.2, 0.13, 0.1, 0.07],
            mixed_weight: 0.05,
            plural_subject_prob: 0.4,
            modifier_weights: ModifierWeights::default(),
            coordination_prob: 0.25,
            reduced_relative_prob: 0.5,
            fronted_pp_prob: 0.15,
            adjective_prob: 0.3,
            force_modifier: None,
        }
    }
}

impl GrammarConfig {
    pub fn validate(&self) -> Result<()> {
        let lists: [(&str, usize); 9] = [
            ("nouns", self.nouns.len()),
            ("adjectives", self.adjectives.len()),
            ("prepositions", self.prepositions.len()),
            ("fronted_prepositions", self.fronted_prepositions.len()),
            ("past_verbs", self.past_verbs.len()),
            ("embedded_verbs", self.embedded_verbs.len()),
            ("verbs", self.verbs.len()),
            ("predicate_adjectives", self.predicate_adjectives.len()),
            ("adverbs", self.adverbs.len()),
        ];
        if let Some((name, _)) = lists.iter().find(|(_, n)| *n == 0) {
            return Err(Error::Config(format!("grammar lexicon `{name}` is empty")));
        }
        let mut weights = self.attractor_weights.to_vec();
        weights.push(self.mixed_weight);
        if weights.iter().any(|w| w.is_nan() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config(
                "attractor weights must be non-negative with positive sum".into(),
            ));
        }
        let m = &self.modifier_weights;
        let mods = [m.prepositional, m.relative, m.object_relative];
        if mods.iter().any(|w| w.is_nan() || *w < 0.0) || mods.iter().sum::<f64>() <= 0.0 {
            return Err(Error::Config(
                "modifier weights must be non-negative with positive sum".into(),
            ));
        }
        for (name, p) in [
            ("plural_subject_prob", self.plural_subject_prob),
            ("coordination_prob", self.coordination_prob),
            ("reduced_relative_prob", self.reduced_relative_prob),
            ("fronted_pp_prob", self.fronted_pp_prob),
            ("adjective_prob", self.adjective_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must lie in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Every present-tense verb with its two forms.
    pub fn verb_pairs(&self) -> Vec<VerbPair> {
        let mut out: Vec<VerbPair> = Vec::new();
        for v in self.verbs.iter().chain(&self.embedded_verbs) {
            if !out.iter().any(|p| p.singular == v.singular) {
                out.push(VerbPair {
                    singular: v.singular.clone(),
                    plural: v.plural.clone(),
                });
            }
        }
        out
    }
}

struct Builder {
    tokens: Vec<String>,
    pos: Vec<String>,
    tags: Vec<String>,
}

impl Builder {
    fn push(&mut self, word: &str, pos: &str, tag: &str) -> usize {
        self.tokens.push(word.to_string());
        self.pos.push(pos.to_string());
        self.tags.push(tag.to_string());
        self.tokens.len() - 1
    }

    fn noun_phrase(
        &mut self,
        g: &GrammarConfig,
        rng: &mut Rng,
        det_tag: &str,
        number: Number,
        noun: Option<&NounEntry>,
    ) -> usize {
        self.push("the", "DT", det_tag);
        for _ in 0..2 {
            if rng.bernoulli(g.adjective_prob) {
                let adj = rng.pick(&g.adjectives).expect("validated");
                self.push(adj, "JJ", ADJ);
            }
        }
        let entry = noun.unwrap_or_else(|| rng.pick(&g.nouns).expect("validated"));
        match number {
            Number::Sg => self.push(&entry.singular, "NN", NOUN),
            Number::Pl => self.push(&entry.plural, "NNS", NOUN),
        }
    }
}

fn random_number(rng: &mut Rng) -> Number {
    if rng.bernoulli(0.5) {
        Number::Pl
    } else {
        Number::Sg
    }
}

fn generate_one(g: &GrammarConfig, rng: &mut Rng) -> Sentence {
    let mut weights = g.attractor_weights.to_vec();
    weights.push(g.mixed_weight);
    let category = rng.weighted(&weights).expect("validated");
    let subject = if rng.bernoulli(g.plural_subject_prob) {
        Number::Pl
    } else {
        Number::Sg
    };
    let intervening: Vec<Number> = if category < 5 {
        vec![subject.opposite(); category]
    } else {
        let k = 1 + rng.below(4);
        loop {
            let v: Vec<Number> = (0..k).map(|_| random_number(rng)).collect();
            if v.contains(&subject) {
                break v;
            }
        }
    };

    let mut b = Builder {
        tokens: Vec::new(),
        pos: Vec::new(),
        tags: Vec::new(),
    };
    if rng.bernoulli(g.fronted_pp_prob) {
        let prep = rng.pick(&g.fronted_prepositions).expect("validated");
        b.push(prep, "IN", PREP_FRONT);
        let n = random_number(rng);
        b.noun_phrase(g, rng, DET_OBJ, n, None);
        b.push(",", ",", COMMA);
    }
    let subject_index = b.noun_phrase(g, rng, DET_SUBJ, subject, None);

    let m = &g.modifier_weights;
    let mut previous: Option<ModifierKind> = None;
    for (j, &num) in intervening.iter().enumerate() {
        let last = j + 1 == intervening.len();
        if previous == Some(ModifierKind::Prepositional) && rng.bernoulli(g.coordination_prob) {
            b.push("and", "CC", CONJ);
            b.noun_phrase(g, rng, DET_OBJ, num, None);
            continue;
        }
        let kind = match g.force_modifier {
            Some(k) if k != ModifierKind::ObjectRelative || last => k,
            Some(_) => ModifierKind::Relative,
            None => {
                let object_rel = if last { m.object_relative } else { 0.0 };
                match rng.weighted(&[m.prepositional, m.relative, object_rel]) {
                    Some(0) | None => ModifierKind::Prepositional,
                    Some(1) => ModifierKind::Relative,
                    Some(_) => ModifierKind::ObjectRelative,
                }
            }
        };
        match kind {
            ModifierKind::Prepositional => {
                let prep = rng.pick(&g.prepositions).expect("validated");
                b.push(prep, "IN", PREP_NOUN);
                b.noun_phrase(g, rng, DET_OBJ, num, None);
            }
            ModifierKind::Relative => {
                b.push("that", "WDT", REL_SUBJ);
                let v = rng.pick(&g.past_verbs).expect("validated");
                b.push(v, "VBD", VERB_TRANS);
                b.noun_phrase(g, rng, DET_OBJ, num, None);
            }
            ModifierKind::ObjectRelative => {
                if !rng.bernoulli(g.reduced_relative_prob) {
                    b.push("that", "WDT", REL_OBJ);
                }
                b.noun_phrase(g, rng, DET_SUBJ, num, None);
                let v = rng.pick(&g.embedded_verbs).expect("validated");
                b.push(v.form_for(num), num.verb_tag(), VERB_TRANS);
            }
        }
        previous = Some(kind);
    }

    let verb = rng.pick(&g.verbs).expect("validated");
    let verb_index = b.push(
        verb.form_for(subject),
        subject.verb_tag(),
        verb_frame_tag(verb.frame),
    );
    match verb.frame {
        VerbFrame::Copula => {
            let adj = rng.pick(&g.predicate_adjectives).expect("validated");
            b.push(adj, "JJ", ADJ_PRED);
        }
        VerbFrame::Transitive => {
            let n = random_number(rng);
            b.noun_phrase(g, rng, DET_OBJ, n, None);
        }
        VerbFrame::Intransitive => {}
    }
    if rng.bernoulli(0.3) {
        let adv = rng.pick(&g.adverbs).expect("validated");
        b.push(adv, "RB", ADVERB);
    }
    b.push(".", ".", PERIOD);

    Sentence {
        tokens: b.tokens,
        pos: b.pos,
        supertags: Some(b.tags),
        subject_index: Some(subject_index),
        verb_index: Some(verb_index),
        verb_number: Some(subject),
    }
}

fn verb_frame_tag(frame: VerbFrame) -> &'static str {
    match frame {
        VerbFrame::Intransitive => VERB_INTRANS,
        VerbFrame::Transitive => VERB_TRANS,
        VerbFrame::Copula => VERB_COPULA,
    }
}

impl VerbEntry {
    fn form_for(&self, n: Number) -> &str {
        match n {
            Number::Sg => &self.singular,
            Number::Pl => &self.plural,
        }
    }
}

/// Generates `n` annotated sentences. Each sentence's attractor statistic is
/// re-derived with [`count_attractors`] and must match what was requested.
pub fn generate_synthetic(
    grammar: &GrammarConfig,
    n: usize,
    rng: &mut Rng,
) -> Result<Vec<Sentence>> {
    grammar.validate()?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let s = generate_one(grammar, rng);
        debug_assert!(s.validate().is_ok());
        if count_attractors(&s).is_none() {
            return Err(Error::Annotation(
                "generator produced an unannotated sentence".into(),
            ));
        }
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{intervening_nouns, AttractorCount};

    #[test]
    fn deterministic_for_seed() {
        let g = GrammarConfig::default();
        let a = generate_synthetic(&g, 200, &mut Rng::new(5)).unwrap();
        let b = generate_synthetic(&g, 200, &mut Rng::new(5)).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic(&g, 200, &mut Rng::new(6)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn every_sentence_valid_with_toy_tags() {
        let g = GrammarConfig::default();
        for s in generate_synthetic(&g, 2000, &mut Rng::new(1)).unwrap() {
            s.validate().unwrap();
            for t in s.supertags.as_ref().unwrap() {
                assert!(TOY_SUPERTAGS.contains(&t.as_str()), "{t}");
            }
        }
    }

    #[test]
    fn requested_attractor_counts_are_reproduced() {
        for k in 0..5 {
            let mut weights = [0.0; 5];
            weights[k] = 1.0;
            let g = GrammarConfig {
                attractor_weights: weights,
                mixed_weight: 0.0,
                ..GrammarConfig::default()
            };
            for s in generate_synthetic(&g, 300, &mut Rng::new(k as u64)).unwrap() {
                assert_eq!(count_attractors(&s), Some(AttractorCount::Count(k)));
            }
        }
        let g = GrammarConfig {
            attractor_weights: [0.0; 5],
            mixed_weight: 1.0,
            ..GrammarConfig::default()
        };
        for s in generate_synthetic(&g, 300, &mut Rng::new(9)).unwrap() {
            assert_eq!(count_attractors(&s), Some(AttractorCount::Mixed));
            assert!(!intervening_nouns(&s).unwrap().is_empty());
        }
    }

    #[test]
    fn modifier_flag_controls_construction() {
        let mut g = GrammarConfig {
            attractor_weights: [0.0, 1.0, 0.0, 0.0, 0.0],
            mixed_weight: 0.0,
            fronted_pp_prob: 0.0,
            force_modifier: Some(ModifierKind::Prepositional),
            ..GrammarConfig::default()
        };
        for s in generate_synthetic(&g, 100, &mut Rng::new(2)).unwrap() {
            let after = &s.tokens[s.subject_index.unwrap() + 1];
            assert!(g.prepositions.contains(after), "{:?}", s.tokens);
        }
        g.force_modifier = Some(ModifierKind::Relative);
        for s in generate_synthetic(&g, 100, &mut Rng::new(2)).unwrap() {
            assert_eq!(s.tokens[s.subject_index.unwrap() + 1], "that");
            assert_eq!(s.pos[s.subject_index.unwrap() + 2], "VBD");
        }
    }

    #[test]
    fn label_balance_follows_config() {
        let g = GrammarConfig::default();
        let sents = generate_synthetic(&g, 10_000, &mut Rng::new(3)).unwrap();
        let pl = sents
            .iter()
            .filter(|s| s.verb_number == Some(Number::Pl))
            .count() as f64;
        let frac = pl / sents.len() as f64;
        // 4 standard errors of a binomial proportion at p = 0.4, n = 10000
        let se = (0.4f64 * 0.6 / 10_000.0).sqrt();
        assert!((frac - g.plural_subject_prob).abs() < 4.0 * se, "{frac}");
    }

    #[test]
    fn empty_lexicon_is_configuration_error() {
        let mut g = GrammarConfig::default();
        g.nouns.clear();
        assert!(matches!(
            generate_synthetic(&g, 1, &mut Rng::new(1)),
            Err(Error::Config(_))
        ));
    }
}
