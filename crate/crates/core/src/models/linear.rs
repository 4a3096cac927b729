//! Shallow bag-of-n-grams classifier in the style of fastText: hashed n-gram
//! embeddings are averaged into a hidden vector that feeds a linear softmax
//! layer, trained with plain SGD and a linearly decaying learning rate.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::codec::{Reader, Writer};
use super::{check_level, softmax, ModelKind, ModelPrediction, Scorer};
use crate::corpus::{extract_ngrams, Instance, LabeledInstance};
use crate::error::{Error, Result};
use crate::label::Level;

pub const DEFAULT_BUCKETS: u32 = 1 << 21;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConfig {
    /// Highest n-gram order; all orders `1..=ngram_order` are used.
    pub ngram_order: usize,
    pub dim: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
    pub buckets: u32,
    /// Per-class loss weights, aligned with `level.classes()`.
    pub class_weights: Option<Vec<f64>>,
}

impl LinearConfig {
    pub fn for_level(level: Level) -> Self {
        let (ngram_order, learning_rate) = match level {
            Level::A | Level::B => (2, 0.01),
            Level::C => (3, 0.09),
        };
        LinearConfig {
            ngram_order,
            dim: 32,
            learning_rate,
            epochs: 25,
            seed: crate::DEFAULT_SEED,
            buckets: DEFAULT_BUCKETS,
            class_weights: None,
        }
    }

    fn validate(&self, level: Level) -> Result<()> {
        if self.ngram_order == 0 || self.dim == 0 || self.buckets == 0 {
            return Err(Error::invalid("n-gram order, dimension and buckets must be >= 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if let Some(w) = &self.class_weights {
            if w.len() != level.classes().len() || w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(Error::invalid(format!(
                    "class weights must be {} positive values",
                    level.classes().len()
                )));
            }
        }
        Ok(())
    }

    fn orders(&self) -> Vec<usize> {
        (1..=self.ngram_order).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub name: String,
    pub level: Level,
    pub config: LinearConfig,
    embeddings: HashMap<u32, Vec<f32>>,
    weights: Vec<Vec<f64>>,
    biases: Vec<f64>,
}

/// 32-bit FNV-1a.
fn fnv1a(bytes: &[u8]) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for &b in bytes {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

fn row_seed(seed: u64, bucket: u32) -> u64 {
    // splitmix64 finalizer over the pair
    let mut z = seed ^ (bucket as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

struct Example {
    buckets: Vec<u32>,
    class: usize,
}

impl LinearModel {
    pub fn train(data: &[LabeledInstance], level: Level, config: LinearConfig) -> Result<Self> {
        let epochs = config.epochs;
        Ok(Self::train_phases(&[(data, epochs)], level, config)?.0)
    }

    /// Trains through consecutive `(data, epochs)` phases, as a curriculum
    /// schedule prescribes. Returns the model and the mean training loss over
    /// all phase data after every epoch.
    pub fn train_phases(
        phases: &[(&[LabeledInstance], usize)],
        level: Level,
        config: LinearConfig,
    ) -> Result<(Self, Vec<f64>)> {
        config.validate(level)?;
        let k = level.classes().len();
        let orders = config.orders();
        let mut model = LinearModel {
            name: "linear".to_string(),
            level,
            embeddings: HashMap::new(),
            weights: vec![vec![0.0; config.dim]; k],
            biases: vec![0.0; k],
            config,
        };

        let mut prepared: Vec<(Vec<Example>, usize)> = Vec::new();
        let mut seen = vec![false; k];
        for (data, epochs) in phases {
            let mut examples = Vec::with_capacity(data.len());
            for d in data.iter() {
                let class = d.label.at(level).ok_or_else(|| {
                    Error::Training(format!("instance `{}` has no Level {level} label", d.instance.id))
                })?;
                let class = level.index_of(class).expect("label level checked");
                seen[class] = true;
                let buckets = model.buckets_of(&d.instance.tokens, &orders);
                for &b in &buckets {
                    model.ensure_row(b);
                }
                examples.push(Example { buckets, class });
            }
            prepared.push((examples, *epochs));
        }
        if prepared.iter().all(|(e, _)| e.is_empty()) {
            return Err(Error::Training("empty training set".into()));
        }
        if seen.iter().filter(|&&s| s).count() < 2 {
            return Err(Error::Training(format!(
                "Level {level} training data has fewer than two classes"
            )));
        }

        let total_steps: usize = prepared.iter().map(|(e, n)| e.len() * n).sum();
        let base_lr = model.config.learning_rate;
        let mut rng = ChaCha8Rng::seed_from_u64(model.config.seed);
        let mut step = 0usize;
        let mut losses = Vec::new();
        for (examples, epochs) in &prepared {
            let mut order: Vec<usize> = (0..examples.len()).collect();
            for _ in 0..*epochs {
                order.shuffle(&mut rng);
                for &i in &order {
                    let progress = step as f64 / total_steps as f64;
                    let lr = base_lr * (1.0 - progress).max(0.0);
                    model.update(&examples[i], lr);
                    step += 1;
                }
                let all = prepared.iter().flat_map(|(e, _)| e.iter());
                let (sum, n) = all.fold((0.0, 0usize), |(s, n), ex| (s + model.loss(ex), n + 1));
                losses.push(sum / n as f64);
            }
        }
        Ok((model, losses))
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    fn bucket(&self, gram: &str) -> u32 {
        fnv1a(gram.as_bytes()) % self.config.buckets
    }

    fn buckets_of(&self, tokens: &[String], orders: &[usize]) -> Vec<u32> {
        extract_ngrams(tokens, orders)
            .iter()
            .map(|g| self.bucket(g))
            .collect()
    }

    fn ensure_row(&mut self, bucket: u32) {
        let dim = self.config.dim;
        let seed = self.config.seed;
        self.embeddings.entry(bucket).or_insert_with(|| {
            let mut rng = ChaCha8Rng::seed_from_u64(row_seed(seed, bucket));
            let bound = 1.0 / dim as f32;
            (0..dim).map(|_| rng.gen_range(-bound..bound)).collect()
        });
    }

    fn weight(&self, class: usize) -> f64 {
        self.config
            .class_weights
            .as_ref()
            .map_or(1.0, |w| w[class])
    }

    /// Mean of the known rows among `buckets`; zero when none is known.
    fn hidden(&self, buckets: &[u32]) -> (Vec<f64>, usize) {
        let mut h = vec![0.0; self.config.dim];
        let mut n = 0;
        for b in buckets {
            if let Some(row) = self.embeddings.get(b) {
                for (x, &r) in h.iter_mut().zip(row) {
                    *x += r as f64;
                }
                n += 1;
            }
        }
        if n > 0 {
            for x in &mut h {
                *x /= n as f64;
            }
        }
        (h, n)
    }

    fn logits(&self, h: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.biases)
            .map(|(w, b)| w.iter().zip(h).map(|(a, x)| a * x).sum::<f64>() + b)
            .collect()
    }

    fn loss(&self, ex: &Example) -> f64 {
        let (h, _) = self.hidden(&ex.buckets);
        let p = softmax(&self.logits(&h), 1.0);
        -self.weight(ex.class) * p[ex.class].max(1e-300).ln()
    }

    fn update(&mut self, ex: &Example, lr: f64) {
        let (h, n) = self.hidden(&ex.buckets);
        let p = softmax(&self.logits(&h), 1.0);
        let w = self.weight(ex.class);
        let mut grad_h = vec![0.0; self.config.dim];
        for (c, &pc) in p.iter().enumerate() {
            let target = if c == ex.class { 1.0 } else { 0.0 };
            let g = lr * w * (target - pc);
            for (gh, &wc) in grad_h.iter_mut().zip(&self.weights[c]) {
                *gh += g * wc;
            }
            for (wc, &x) in self.weights[c].iter_mut().zip(&h) {
                *wc += g * x;
            }
            self.biases[c] += g;
        }
        if n == 0 {
            return;
        }
        let scale = 1.0 / n as f64;
        for b in &ex.buckets {
            if let Some(row) = self.embeddings.get_mut(b) {
                for (r, &g) in row.iter_mut().zip(&grad_h) {
                    *r += (g * scale) as f32;
                }
            }
        }
    }

    pub fn predict(&self, instance: &Instance) -> ModelPrediction {
        let buckets = self.buckets_of(&instance.tokens, &self.config.orders());
        let (h, _) = self.hidden(&buckets);
        let confidences = softmax(&self.logits(&h), 1.0);
        ModelPrediction::from_confidences(self.name.clone(), ModelKind::Discrete, self.level, confidences)
    }

    /// Softmax of the output biases alone (the zero feature vector).
    pub fn bias_distribution(&self) -> Vec<f64> {
        softmax(&self.biases, 1.0)
    }

    pub(crate) fn encode(&self, w: &mut Writer) {
        let c = &self.config;
        w.u32(c.ngram_order as u32);
        w.u32(c.dim as u32);
        w.f64(c.learning_rate);
        w.u32(c.epochs as u32);
        w.u64(c.seed);
        w.u32(c.buckets);
        match &c.class_weights {
            Some(cw) => {
                w.u32(1);
                cw.iter().for_each(|&x| w.f64(x));
            }
            None => w.u32(0),
        }
        w.str(&self.name);
        for (ws, &b) in self.weights.iter().zip(&self.biases) {
            w.f64(b);
            ws.iter().for_each(|&x| w.f64(x));
        }
        let mut rows: Vec<(&u32, &Vec<f32>)> = self.embeddings.iter().collect();
        rows.sort_by_key(|(b, _)| **b);
        w.u64(rows.len() as u64);
        for (b, row) in rows {
            w.u32(*b);
            row.iter().for_each(|&x| w.f32(x));
        }
    }

    pub(crate) fn decode(level: Level, r: &mut Reader<'_>) -> Result<Self> {
        let k = level.classes().len();
        let ngram_order = r.u32()? as usize;
        let dim = r.u32()? as usize;
        let learning_rate = r.f64()?;
        let epochs = r.u32()? as usize;
        let seed = r.u64()?;
        let buckets = r.u32()?;
        let class_weights = match r.u32()? {
            0 => None,
            1 => Some((0..k).map(|_| r.f64()).collect::<Result<Vec<_>>>()?),
            other => return Err(Error::ModelFormat(format!("bad class-weight flag {other}"))),
        };
        let config = LinearConfig {
            ngram_order,
            dim,
            learning_rate,
            epochs,
            seed,
            buckets,
            class_weights,
        };
        config
            .validate(level)
            .map_err(|e| Error::ModelFormat(e.to_string()))?;
        let name = r.str()?;
        let mut weights = Vec::with_capacity(k);
        let mut biases = Vec::with_capacity(k);
        for _ in 0..k {
            biases.push(r.f64()?);
            weights.push((0..dim).map(|_| r.f64()).collect::<Result<Vec<_>>>()?);
        }
        let n = r.u64()?;
        let mut embeddings = HashMap::new();
        for _ in 0..n {
            let b = r.u32()?;
            let row = (0..dim).map(|_| r.f32()).collect::<Result<Vec<_>>>()?;
            embeddings.insert(b, row);
        }
        Ok(LinearModel {
            name,
            level,
            config,
            embeddings,
            weights,
            biases,
        })
    }
}

impl Scorer for LinearModel {
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
