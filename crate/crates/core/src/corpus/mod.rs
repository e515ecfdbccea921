//! Annotated sentences, vocabulary construction, agreement instances,
//! supertag inventories and the synthetic template grammar.

mod agreement;
mod jsonl;
mod sentence;
mod synthetic;
mod tags;
mod vocab;

pub use agreement::{
    count_attractors, extract_agreement, extract_all, filter_intervening_noun, intervening_nouns,
    AgreementInstance, AttractorCount,
};
pub use jsonl::{parse_jsonl, read_jsonl, read_jsonl_lenient, write_jsonl, Diagnostic};
pub use sentence::{noun_number, Number, Sentence};
pub use synthetic::{
    generate_synthetic, GrammarConfig, ModifierKind, ModifierWeights, NounEntry, VerbEntry,
    VerbFrame, VerbPair, TOY_SUPERTAGS,
};
pub use tags::{
    pos_inventory, prune_supertags, strip_pos_number, TagInventory, MERGED_PRESENT_TAG,
};
pub use vocab::{build_vocab, replace_rare, Vocab, VocabRule, PENN_TAGS};
