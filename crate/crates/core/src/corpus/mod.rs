//! Corpus ingestion: instances, gold and raw file formats, the collection
//! filters and the stopword-weighted collection sampler.

mod gold;
mod raw;
mod stopwords;
pub mod synth;
mod text;

use serde::{Deserialize, Serialize};

pub use gold::{parse_gold_tsv, write_gold_tsv, GOLD_HEADER};
pub use raw::{read_raw_jsonl, write_raw_jsonl, RawLine, RawRecord};
pub use stopwords::{sample_stopword, StopwordEntry, StopwordTable};
pub use text::{
    anonymize, extract_ngrams, filter_raw, ngram_counts, tokenize, DropReason, FilterDecision,
    MENTION, MIN_CHARS, MIN_WORDS, NGRAM_SEP,
};

use crate::label::{HierLabel, Level};

/// One text item. `text` is already anonymized and `tokens` is always
/// `tokenize(text)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub id: String,
    pub text: String,
    pub tokens: Vec<String>,
}

impl Instance {
    /// Anonymizes and tokenizes `raw_text`.
    pub fn new(id: impl Into<String>, raw_text: &str) -> Self {
        let text = anonymize(raw_text);
        let tokens = tokenize(&text);
        Instance {
            id: id.into(),
            text,
            tokens,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledInstance {
    pub instance: Instance,
    pub label: HierLabel,
}

impl LabeledInstance {
    pub fn new(instance: Instance, label: HierLabel) -> Self {
        LabeledInstance { instance, label }
    }
}

/// Instances that carry a label at `level` (e.g. only OFF tweets for Level B).
pub fn labeled_at(data: &[LabeledInstance], level: Level) -> Vec<LabeledInstance> {
    data.iter()
        .filter(|d| d.label.at(level).is_some())
        .cloned()
        .collect()
}
