//! Seeded synthetic tweets with a planted lexicon signal, used for demos and
//! end-to-end tests when no real corpus is at hand.
//!
//! Offensive items always contain a curse word. Untargeted ones contain no
//! target word; targeted ones name an individual, a group or an
//! organisation, which also determines their Level C label.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, LabeledInstance, RawRecord};
use crate::label::{ClassLabel, HierLabel};

const NEUTRAL: &[&str] = &[
    "today", "really", "game", "weather", "coffee", "music", "happy", "weekend", "friends",
    "watching", "movie", "great", "morning", "love", "new", "song", "time", "good", "people",
    "dinner", "team", "win", "season", "book", "reading", "night", "best", "work", "home",
    "beautiful", "summer", "family", "excited", "show", "amazing", "thanks", "birthday", "pizza",
];

const CURSES: &[&str] = &["fuck", "shit", "damn", "bitch", "ass", "crap", "wtf", "stupid", "idiot"];

const TARGET_IND: &[&str] = &["you", "he", "she", "@USER"];
const TARGET_GRP: &[&str] = &["liberals", "conservatives", "immigrants", "fans", "democrats"];
const TARGET_OTH: &[&str] = &["government", "company", "media", "league", "network"];

#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    /// Fraction of offensive items.
    pub off_rate: f64,
    /// Fraction of offensive items that are untargeted.
    pub unt_rate: f64,
    /// Probability that a NOT item nevertheless contains a curse word.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            off_rate: 0.33,
            unt_rate: 0.3,
            noise: 0.0,
            seed: crate::DEFAULT_SEED,
        }
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, words: &[&'a str]) -> &'a str {
    words.choose(rng).expect("non-empty word list")
}

fn filler(rng: &mut ChaCha8Rng, words: &mut Vec<String>, n: usize) {
    for _ in 0..n {
        words.push(pick(rng, NEUTRAL).to_string());
    }
}

fn one(rng: &mut ChaCha8Rng, cfg: &SynthConfig) -> (String, HierLabel) {
    let mut words = Vec::new();
    let n_fill = rng.gen_range(3..8);
    filler(rng, &mut words, n_fill);
    let label = if rng.gen_bool(cfg.off_rate) {
        let curse = pick(rng, CURSES).to_string();
        let at = rng.gen_range(0..=words.len());
        words.insert(at, curse);
        if rng.gen_bool(cfg.unt_rate) {
            HierLabel::new(ClassLabel::Off, Some(ClassLabel::Unt), None)
        } else {
            let (c, targets) = match rng.gen_range(0..10) {
                0..=5 => (ClassLabel::Ind, TARGET_IND),
                6..=8 => (ClassLabel::Grp, TARGET_GRP),
                _ => (ClassLabel::Oth, TARGET_OTH),
            };
            words.insert(0, pick(rng, targets).to_string());
            HierLabel::new(ClassLabel::Off, Some(ClassLabel::Tin), Some(c))
        }
        .expect("valid hierarchical label")
    } else {
        if rng.gen_bool(cfg.noise) {
            words.push(pick(rng, CURSES).to_string());
        }
        HierLabel::not()
    };
    let mut text = words.join(" ");
    if text.chars().count() < super::MIN_CHARS {
        text.push_str(" and more words");
    }
    (text, label)
}

/// `n` labeled items with ids `s000000`, `s000001`, ...
pub fn labeled(n: usize, cfg: &SynthConfig) -> Vec<LabeledInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..n)
        .map(|i| {
            let (text, label) = one(&mut rng, cfg);
            LabeledInstance::new(Instance::new(format!("s{i:06}"), &text), label)
        })
        .collect()
}

pub fn raw(n: usize, cfg: &SynthConfig) -> Vec<RawRecord> {
    labeled(n, cfg)
        .into_iter()
        .map(|d| RawRecord {
            id: d.instance.id,
            text: d.instance.text,
        })
        .collect()
}
