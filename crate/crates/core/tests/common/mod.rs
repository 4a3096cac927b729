//! Helpers shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use colabel::corpus::{Instance, LabeledInstance, NGRAM_SEP};
use colabel::{ClassLabel, HierLabel, Level};
use rand::Rng;

const WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "eps", "zeta", "eta", "theta", "iota", "kappa"];

pub fn label_for(level: Level, class: ClassLabel) -> HierLabel {
    use ClassLabel::*;
    match level {
        Level::A if class == Not => HierLabel::not(),
        Level::A => HierLabel::new(Off, None, None).unwrap(),
        Level::B => HierLabel::new(Off, Some(class), None).unwrap(),
        Level::C => HierLabel::new(Off, Some(Tin), Some(class)).unwrap(),
    }
}

/// A random corpus of at most `max_tokens` tokens over a small vocabulary,
/// with every class of `level` present.
pub fn random_corpus<R: Rng>(rng: &mut R, level: Level, max_tokens: usize) -> Vec<LabeledInstance> {
    let classes = level.classes();
    let mut docs = Vec::new();
    let mut used = 0;
    let mut i = 0;
    loop {
        let class = if i < classes.len() { classes[i] } else { classes[rng.gen_range(0..classes.len())] };
        let len = rng.gen_range(1..=12).min(max_tokens - used);
        if len == 0 || (i >= classes.len() && rng.gen_bool(0.1)) {
            break;
        }
        let vocab = rng.gen_range(3..=WORDS.len());
        let words: Vec<&str> = (0..len).map(|_| WORDS[rng.gen_range(0..vocab)]).collect();
        docs.push(LabeledInstance::new(Instance::new(format!("d{i}"), &words.join(" ")), label_for(level, class)));
        used += len;
        i += 1;
    }
    docs
}

/// Per-class counts recomputed by scanning every document window by window.
pub struct BruteCounts {
    pub by_ngram: HashMap<String, Vec<f64>>,
    pub class_totals: Vec<f64>,
    pub total: f64,
}

pub fn brute_counts(data: &[LabeledInstance], level: Level, orders: &[usize]) -> BruteCounts {
    let k = level.classes().len();
    let mut by_ngram: HashMap<String, Vec<f64>> = HashMap::new();
    let mut class_totals = vec![0.0; k];
    for d in data {
        let ci = level.classes().iter().position(|&c| Some(c) == d.label.at(level)).unwrap();
        let t = &d.instance.tokens;
        for &n in orders {
            let mut start = 0;
            while start + n <= t.len() {
                let key = t[start..start + n].join(&NGRAM_SEP.to_string());
                by_ngram.entry(key).or_insert_with(|| vec![0.0; k])[ci] += 1.0;
                class_totals[ci] += 1.0;
                start += 1;
            }
        }
    }
    let total = class_totals.iter().sum();
    BruteCounts { by_ngram, class_totals, total }
}

/// (pmi, pmi_so) in bits from raw counts of one n-gram.
pub fn oracle_scores(counts: &[f64], ci: usize, class_totals: &[f64], total: f64, smoothing: f64) -> (f64, f64) {
    let p_wc = (counts[ci] + smoothing) / total;
    let p_w = counts.iter().map(|c| c + smoothing).sum::<f64>() / total;
    let p_c = class_totals[ci] / total;
    let p_w_not_c = p_w - p_wc;
    let p_not_c = 1.0 - p_c;
    let pmi = (p_wc / (p_w * p_c)).log2();
    let pmi_so = ((p_wc / p_c) / (p_w_not_c / p_not_c)).log2();
    (pmi, pmi_so)
}

/// Compares a trained model against the brute-force oracle. Returns the
/// number of (n-gram, class) pairs checked.
pub fn check_pmi_against_oracle(
    model: &colabel::models::PmiModel,
    data: &[LabeledInstance],
    tol: f64,
) -> Result<usize, String> {
    let level = model.level;
    let cfg = &model.config;
    let brute = brute_counts(data, level, &cfg.orders);
    let mut checked = 0;
    for (w, counts) in &brute.by_ngram {
        let raw: f64 = counts.iter().sum();
        let should_score = raw >= cfg.min_count as f64;
        if model.is_scored(w) != should_score {
            return Err(format!("n-gram `{w}` scored={} but raw count {raw}", model.is_scored(w)));
        }
        if !should_score {
            continue;
        }
        for (ci, &c) in level.classes().iter().enumerate() {
            let (pmi, so) = oracle_scores(counts, ci, &brute.class_totals, brute.total, cfg.smoothing);
            let got_pmi = model.pmi_score(w, c).unwrap();
            let got_so = model.pmi_so_score(w, c).unwrap();
            let close = |a: f64, b: f64| (a == b) || (a - b).abs() <= tol;
            if !close(pmi, got_pmi) || !close(so, got_so) {
                return Err(format!("`{w}` {c}: pmi {got_pmi} vs {pmi}, so {got_so} vs {so}"));
            }
            checked += 1;
        }
    }
    if model.vocabulary().count() != brute.by_ngram.values().filter(|c| c.iter().sum::<f64>() >= cfg.min_count as f64).count() {
        return Err("vocabulary size differs from oracle".into());
    }
    Ok(checked)
}
