//! Curse-word presence baseline (Level A only).

use std::collections::BTreeSet;

use super::codec::{Reader, Writer};
use super::{check_level, ModelKind, ModelPrediction, Scorer};
use crate::corpus::Instance;
use crate::error::Result;
use crate::label::Level;

pub const CURSE_WORDS: [&str; 22] = [
    "ass", "arse", "wtf", "lmao", "fuck", "bitch", "nigga", "nigger", "cunt", "effing", "shit",
    "hell", "damn", "crap", "bastard", "idiot", "stupid", "racist", "dumb", "f*ck", "pussy", "dick",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconModel {
    pub name: String,
    words: BTreeSet<String>,
}

impl Default for LexiconModel {
    fn default() -> Self {
        LexiconModel::new(CURSE_WORDS)
    }
}

impl LexiconModel {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        LexiconModel {
            name: "lexicon".to_string(),
            words: words.into_iter().map(|w| w.as_ref().to_lowercase()).collect(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.words.iter().map(String::as_str)
    }

    pub fn matches(&self, instance: &Instance) -> bool {
        instance
            .tokens
            .iter()
            .any(|t| self.words.contains(&t.to_lowercase()))
    }

    pub fn predict(&self, instance: &Instance) -> ModelPrediction {
        let off = if self.matches(instance) { 1.0 } else { 0.0 };
        ModelPrediction::from_confidences(self.name.clone(), ModelKind::Discrete, Level::A, vec![off, 1.0 - off])
    }

    pub(crate) fn encode(&self, w: &mut Writer) {
        w.str(&self.name);
        w.u32(self.words.len() as u32);
        for word in &self.words {
            w.str(word);
        }
    }

    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Self> {
        let name = r.str()?;
        let n = r.u32()?;
        let words = (0..n).map(|_| r.str()).collect::<Result<BTreeSet<_>>>()?;
        Ok(LexiconModel { name, words })
    }
}

impl Scorer for LexiconModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> ModelKind {
        ModelKind::Discrete
    }

    fn levels(&self) -> Vec<Level> {
        vec![Level::A]
    }

    fn score(&self, level: Level, batch: &[Instance]) -> Result<Vec<ModelPrediction>> {
        check_level(&self.name, &[Level::A], level)?;
        Ok(batch.iter().map(|i| self.predict(i)).collect())
    }
}
