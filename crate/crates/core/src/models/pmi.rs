//! N-gram PMI / PMI-SO classifier.
//!
//! Probabilities are relative frequencies over extracted n-gram tokens:
//! `p(w,c) = n(w,c)/T`, `p(w) = n(w)/T`, `p(c) = T_c/T`, where `T_c` counts
//! the n-gram tokens of class `c` and `T` all of them. The smoothing constant
//! is added to every per-class n-gram count, so `n(w) = Σ_c (count(w,c) + s)`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::codec::{Reader, Writer};
use super::{check_level, softmax, ModelKind, ModelPrediction, Scorer};
use crate::corpus::{extract_ngrams, Instance, LabeledInstance};
use crate::error::{Error, Result};
use crate::label::{ClassLabel, Level};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmiConfig {
    pub min_count: u64,
    pub smoothing: f64,
    pub orders: Vec<usize>,
    /// Softmax temperature (in bits) turning class score sums into confidences.
    pub temperature: f64,
}

impl Default for PmiConfig {
    fn default() -> Self {
        PmiConfig {
            min_count: 5,
            smoothing: 0.01,
            orders: vec![1, 2],
            temperature: 10.0,
        }
    }
}

impl PmiConfig {
    fn validate(&self) -> Result<()> {
        if self.orders.is_empty() || self.orders.contains(&0) {
            return Err(Error::invalid("n-gram orders must be non-empty and >= 1"));
        }
        if !(self.smoothing >= 0.0 && self.smoothing.is_finite()) {
            return Err(Error::invalid("smoothing must be a finite value >= 0"));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("temperature must be positive"));
        }
        Ok(())
    }
}

/// Raw n-gram/class counts. Per-class vectors follow `level.classes()`.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsTable {
    pub ngram_class_counts: HashMap<String, Vec<u64>>,
    pub class_token_totals: Vec<u64>,
    pub grand_total: u64,
}

impl CountsTable {
    pub fn ngram_total(&self, w: &str) -> u64 {
        self.ngram_class_counts
            .get(w)
            .map_or(0, |v| v.iter().sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NgramScore {
    pub pmi: f64,
    pub pmi_so: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmiModel {
    pub name: String,
    pub level: Level,
    pub config: PmiConfig,
    /// Counts restricted to the scored n-grams; class and grand totals are
    /// over the full training data.
    pub counts: CountsTable,
    scores: HashMap<String, Vec<NgramScore>>,
}

impl PmiModel {
    pub fn train(data: &[LabeledInstance], level: Level, config: PmiConfig) -> Result<Self> {
        config.validate()?;
        if data.is_empty() {
            return Err(Error::Training("empty training set".into()));
        }
        let k = level.classes().len();
        let mut ngram_class_counts: HashMap<String, Vec<u64>> = HashMap::new();
        let mut class_token_totals = vec![0u64; k];
        let mut class_instances = vec![0usize; k];
        for d in data {
            let class = d.label.at(level).ok_or_else(|| {
                Error::Training(format!("instance `{}` has no Level {level} label", d.instance.id))
            })?;
            let ci = level.index_of(class).expect("label level checked");
            class_instances[ci] += 1;
            for gram in extract_ngrams(&d.instance.tokens, &config.orders) {
                ngram_class_counts.entry(gram).or_insert_with(|| vec![0; k])[ci] += 1;
                class_token_totals[ci] += 1;
            }
        }
        let missing: Vec<&str> = level
            .classes()
            .iter()
            .zip(&class_instances)
            .filter(|(_, &n)| n == 0)
            .map(|(c, _)| c.as_str())
            .collect();
        if !missing.is_empty() {
            return Err(Error::Training(format!(
                "Level {level} training data lacks class(es) {}",
                missing.join(", ")
            )));
        }
        if let Some(ci) = class_token_totals.iter().position(|&t| t == 0) {
            return Err(Error::Training(format!(
                "class {} has no n-grams",
                level.classes()[ci]
            )));
        }
        ngram_class_counts.retain(|_, v| v.iter().sum::<u64>() >= config.min_count);
        let grand_total = class_token_totals.iter().sum();
        let counts = CountsTable {
            ngram_class_counts,
            class_token_totals,
            grand_total,
        };
        Ok(PmiModel::from_counts("pmi", level, config, counts))
    }

    fn from_counts(name: &str, level: Level, config: PmiConfig, counts: CountsTable) -> Self {
        let s = config.smoothing;
        let total = counts.grand_total as f64;
        let class_totals: Vec<f64> = counts.class_token_totals.iter().map(|&t| t as f64).collect();
        let scores = counts
            .ngram_class_counts
            .iter()
            .map(|(w, raw)| {
                let smoothed: Vec<f64> = raw.iter().map(|&n| n as f64 + s).collect();
                let n_w: f64 = smoothed.iter().sum();
                let per_class = smoothed
                    .iter()
                    .zip(&class_totals)
                    .map(|(&n_wc, &t_c)| {
                        let pmi = ((n_wc * total) / (n_w * t_c)).log2();
                        let pmi_so = ((n_wc * (total - t_c)) / ((n_w - n_wc) * t_c)).log2();
                        NgramScore { pmi, pmi_so }
                    })
                    .collect();
                (w.clone(), per_class)
            })
            .collect();
        PmiModel {
            name: name.to_string(),
            level,
            config,
            counts,
            scores,
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.scores.keys().map(String::as_str)
    }

    pub fn is_scored(&self, w: &str) -> bool {
        self.scores.contains_key(w)
    }

    fn entry(&self, w: &str, c: ClassLabel) -> Option<NgramScore> {
        let ci = self.level.index_of(c)?;
        self.scores.get(w).map(|v| v[ci])
    }

    /// PMI of `w` with `c` in bits; `None` for n-grams absent from the tables.
    pub fn pmi_score(&self, w: &str, c: ClassLabel) -> Option<f64> {
        self.entry(w, c).map(|e| e.pmi)
    }

    /// Semantically oriented PMI: `c` contrasted with all other classes.
    pub fn pmi_so_score(&self, w: &str, c: ClassLabel) -> Option<f64> {
        self.entry(w, c).map(|e| e.pmi_so)
    }

    /// Per-class sums of PMI + PMI-SO over the scored n-grams of `tokens`,
    /// and the number of scored n-gram occurrences found.
    pub fn class_sums(&self, tokens: &[String]) -> (Vec<f64>, usize) {
        let k = self.level.classes().len();
        let mut sums = vec![0.0; k];
        let mut hits = 0;
        for gram in extract_ngrams(tokens, &self.config.orders) {
            if let Some(per_class) = self.scores.get(&gram) {
                hits += 1;
                for (sum, e) in sums.iter_mut().zip(per_class) {
                    *sum += e.pmi + e.pmi_so;
                }
            }
        }
        // Opposite infinite evidence (possible only without smoothing) cancels.
        for s in &mut sums {
            if s.is_nan() {
                *s = 0.0;
            }
        }
        (sums, hits)
    }

    pub fn predict(&self, instance: &Instance) -> ModelPrediction {
        let (sums, hits) = self.class_sums(&instance.tokens);
        let confidences = softmax(&sums, self.config.temperature);
        let hard_label = if hits == 0 {
            self.level.fallback_class()
        } else {
            self.level.classes()[super::argmax(&sums)]
        };
        ModelPrediction {
            model_name: self.name.clone(),
            kind: ModelKind::Discrete,
            level: self.level,
            confidences,
            hard_label,
        }
    }

    pub(crate) fn encode(&self, w: &mut Writer) {
        w.u64(self.config.min_count);
        w.f64(self.config.smoothing);
        w.f64(self.config.temperature);
        w.u32(self.config.orders.len() as u32);
        for &o in &self.config.orders {
            w.u32(o as u32);
        }
        w.str(&self.name);
        for &t in &self.counts.class_token_totals {
            w.u64(t);
        }
        let mut grams: Vec<(&String, &Vec<u64>)> = self.counts.ngram_class_counts.iter().collect();
        grams.sort();
        w.u64(grams.len() as u64);
        for (g, counts) in grams {
            w.str(g);
            for &c in counts {
                w.u64(c);
            }
        }
    }

    pub(crate) fn decode(level: Level, r: &mut Reader<'_>) -> Result<Self> {
        let min_count = r.u64()?;
        let smoothing = r.f64()?;
        let temperature = r.f64()?;
        let n_orders = r.u32()? as usize;
        let orders = (0..n_orders)
            .map(|_| r.u32().map(|o| o as usize))
            .collect::<Result<Vec<_>>>()?;
        let config = PmiConfig {
            min_count,
            smoothing,
            orders,
            temperature,
        };
        config
            .validate()
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        let name = r.str()?;
        let k = level.classes().len();
        let class_token_totals = (0..k).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let n = r.u64()?;
        let mut ngram_class_counts = HashMap::new();
        for _ in 0..n {
            let g = r.str()?;
            let counts = (0..k).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
            ngram_class_counts.insert(g, counts);
        }
        let grand_total = class_token_totals.iter().sum();
        let counts = CountsTable {
            ngram_class_counts,
            class_token_totals,
            grand_total,
        };
        Ok(PmiModel::from_counts(&name, level, config, counts))
    }
}

impl Scorer for PmiModel {
    fn name(&self) -> &str {
        &self.name
    }

    fn kind(&self) -> ModelKind {
        ModelKind::Discrete
    }

    fn levels(&self) -> Vec<Level> {
        vec![self.level]
    }

    fn score(&self, level: Level, batch: &[Instance]) -> Result<Vec<ModelPrediction>> {
        check_level(&self.name, &[self.level], level)?;
        Ok(batch.iter().map(|i| self.predict(i)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::HierLabel;
    use ClassLabel::*;

    fn item(id: &str, text: &str, a: ClassLabel) -> LabeledInstance {
        let label = if a == Off {
            HierLabel::new(Off, Some(Unt), None).unwrap()
        } else {
            HierLabel::not()
        };
        LabeledInstance::new(Instance::new(id, text), label)
    }

    fn toy() -> Vec<LabeledInstance> {
        vec![
            item("1", "fuck you", Off),
            item("2", "fuck off", Off),
            item("3", "hello there", Not),
            item("4", "good day", Not),
        ]
    }

    fn unigram_cfg(smoothing: f64, min_count: u64) -> PmiConfig {
        PmiConfig {
            min_count,
            smoothing,
            orders: vec![1],
            temperature: 10.0,
        }
    }

    #[test]
    fn toy_pmi_is_one_bit() {
        let m = PmiModel::train(&toy(), Level::A, unigram_cfg(0.0, 1)).unwrap();
        // 2 of the 8 unigram tokens are "fuck", all of them OFF, and OFF holds 4.
        assert!((m.pmi_score("fuck", Off).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(m.pmi_score("fuck", Not).unwrap(), f64::NEG_INFINITY);
        assert!(m.pmi_score("unseen", Off).is_none());
        let p = m.predict(&Instance::new("q", "fuck"));
        assert_eq!(p.hard_label, Off);
        assert!(p.confidences[0] > p.confidences[1]);
    }

    #[test]
    fn uniform_ngram_scores_zero() {
        let data = vec![
            item("1", "the cat", Off),
            item("2", "the dog", Not),
        ];
        let m = PmiModel::train(&data, Level::A, unigram_cfg(0.01, 1)).unwrap();
        for c in [Off, Not] {
            assert!(m.pmi_score("the", c).unwrap().abs() < 1e-12);
            assert!(m.pmi_so_score("the", c).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn min_count_prunes_rare_ngrams() {
        let mut data = toy();
        for i in 0..4 {
            data.push(item(&format!("r{i}"), "rare word", Off));
        }
        data.push(item("x", "frequent frequent frequent frequent frequent", Not));
        let m = PmiModel::train(&data, Level::A, PmiConfig::default()).unwrap();
        // "rare" occurs exactly 4 times.
        assert!(!m.is_scored("rare"));
        assert!(m.is_scored("frequent"));
        assert!(m.vocabulary().all(|w| m.counts.ngram_total(w) >= 5));
    }

    #[test]
    fn fallback_when_nothing_is_scored() {
        let m = PmiModel::train(&toy(), Level::A, unigram_cfg(0.01, 1)).unwrap();
        let p = m.predict(&Instance::new("q", "zzz qqq"));
        assert_eq!(p.hard_label, Not);
        assert_eq!(p.confidences, vec![0.5, 0.5]);

        let c_data = vec![
            LabeledInstance::new(Instance::new("1", "you idiot"), HierLabel::new(Off, Some(Tin), Some(Ind)).unwrap()),
            LabeledInstance::new(Instance::new("2", "those people"), HierLabel::new(Off, Some(Tin), Some(Grp)).unwrap()),
            LabeledInstance::new(Instance::new("3", "the company"), HierLabel::new(Off, Some(Tin), Some(Oth)).unwrap()),
        ];
        let m = PmiModel::train(&c_data, Level::C, unigram_cfg(0.01, 1)).unwrap();
        assert_eq!(m.predict(&Instance::new("q", "nothing known")).hard_label, Ind);
        assert_eq!(m.predict(&Instance::new("q", "")).hard_label, Ind);
    }

    #[test]
    fn training_errors() {
        assert!(matches!(
            PmiModel::train(&[], Level::A, PmiConfig::default()),
            Err(Error::Training(_))
        ));
        let single: Vec<_> = toy().into_iter().filter(|d| d.label.a == Off).collect();
        assert!(matches!(
            PmiModel::train(&single, Level::A, PmiConfig::default()),
            Err(Error::Training(_))
        ));
        // NOT items carry no Level B label.
        assert!(PmiModel::train(&toy(), Level::B, PmiConfig::default()).is_err());
        let bad = PmiConfig {
            orders: vec![],
            ..PmiConfig::default()
        };
        assert!(PmiModel::train(&toy(), Level::A, bad).is_err());
    }

    #[test]
    fn binary_pmi_so_is_antisymmetric() {
        let m = PmiModel::train(&toy(), Level::A, unigram_cfg(0.01, 1)).unwrap();
        for w in m.vocabulary() {
            let a = m.pmi_so_score(w, Off).unwrap();
            let b = m.pmi_so_score(w, Not).unwrap();
            assert!((a + b).abs() < 1e-9, "{w}: {a} {b}");
        }
    }

    #[test]
    fn codec_round_trip() {
        let m = PmiModel::train(&toy(), Level::A, unigram_cfg(0.01, 1)).unwrap();
        let mut w = Writer::default();
        m.encode(&mut w);
        let mut r = Reader::new(&w.buf);
        let back = PmiModel::decode(Level::A, &mut r).unwrap();
        r.finish().unwrap();
        assert_eq!(back, m);
    }
}
