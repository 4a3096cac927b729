use std::collections::HashSet;
use std::sync::Arc;

use rayon::prelude::*;

use super::{aggregate, gate_level_b, gate_level_c, AggregateScore, DistantRecord, GateConfig};
use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::label::{ClassLabel, Level};
use crate::models::{ModelKind, ModelPrediction, Scorer};

/// One ensemble slot: a scorer registered for one level under a name, read
/// by the gates as `kind`.
#[derive(Clone)]
pub struct Member {
    pub name: String,
    pub kind: ModelKind,
    pub scorer: Arc<dyn Scorer>,
}

/// Per-level ensemble members in registration order.
#[derive(Clone, Default)]
pub struct Ensemble {
    members: [Vec<Member>; 3],
}

fn slot(level: Level) -> usize {
    match level {
        Level::A => 0,
        Level::B => 1,
        Level::C => 2,
    }
}

impl Ensemble {
    pub fn new() -> Self {
        Ensemble::default()
    }

    /// Registers `scorer` at `level` under its own name and kind.
    pub fn add(&mut self, level: Level, scorer: Arc<dyn Scorer>) -> Result<&mut Self> {
        let (name, kind) = (scorer.name().to_string(), scorer.kind());
        self.add_as(level, name, kind, scorer)
    }

    pub fn add_as(
        &mut self,
        level: Level,
        name: impl Into<String>,
        kind: ModelKind,
        scorer: Arc<dyn Scorer>,
    ) -> Result<&mut Self> {
        let name = name.into();
        if !scorer.levels().contains(&level) {
            return Err(Error::invalid(format!("model `{name}` cannot score Level {level}")));
        }
        if self.members(level).iter().any(|m| m.name == name) {
            return Err(Error::invalid(format!(
                "duplicate model name `{name}` at Level {level}"
            )));
        }
        self.members[slot(level)].push(Member { name, kind, scorer });
        Ok(self)
    }

    pub fn members(&self, level: Level) -> &[Member] {
        &self.members[slot(level)]
    }

    pub fn validate(&self) -> Result<()> {
        for level in Level::ALL {
            let n = self.members(level).len();
            if n < 2 {
                return Err(Error::invalid(format!(
                    "Level {level} needs at least 2 ensemble models, found {n}"
                )));
            }
        }
        Ok(())
    }

    fn score(&self, level: Level, batch: &[Instance]) -> Result<Vec<Vec<ModelPrediction>>> {
        let mut per_instance: Vec<Vec<ModelPrediction>> = vec![Vec::new(); batch.len()];
        for m in self.members(level) {
            let preds = m.scorer.score(level, batch)?;
            if preds.len() != batch.len() {
                return Err(Error::Protocol(format!(
                    "model `{}` returned {} predictions for {} instances",
                    m.name,
                    preds.len(),
                    batch.len()
                )));
            }
            for (slot, mut p) in per_instance.iter_mut().zip(preds) {
                p.model_name = m.name.clone();
                p.kind = m.kind;
                slot.push(p);
            }
        }
        Ok(per_instance)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CascadeOptions {
    pub threads: usize,
    /// Instances per scoring batch. Batches, not threads, define the units
    /// of work, so the output does not depend on the thread count.
    pub batch_size: usize,
    pub gates: GateConfig,
}

impl Default for CascadeOptions {
    fn default() -> Self {
        CascadeOptions {
            threads: 1,
            batch_size: 256,
            gates: GateConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CascadeOutput {
    /// Sorted by instance id.
    pub records: Vec<DistantRecord>,
    /// Per-model Level A predictions, parallel to `records`.
    pub level_a: Vec<Vec<ModelPrediction>>,
}

fn positive_confidences(preds: &[ModelPrediction], class: ClassLabel) -> Vec<(String, f64)> {
    preds
        .iter()
        .map(|p| (p.model_name.clone(), p.confidence(class)))
        .collect()
}

fn run_batch(
    ensemble: &Ensemble,
    batch: &[Instance],
    gates: &GateConfig,
) -> Result<Vec<(DistantRecord, Vec<ModelPrediction>)>> {
    let a_names: Vec<&str> = ensemble.members(Level::A).iter().map(|m| m.name.as_str()).collect();
    let a_preds = ensemble.score(Level::A, batch)?;

    let mut records = Vec::with_capacity(batch.len());
    let mut b_idx = Vec::new();
    for (i, preds) in a_preds.iter().enumerate() {
        let level_a = aggregate(&positive_confidences(preds, ClassLabel::Off))?;
        if gate_level_b(&a_names, preds, gates)? {
            b_idx.push(i);
        }
        records.push(DistantRecord {
            id: batch[i].id.clone(),
            level_a,
            level_b: None,
            level_c: None,
        });
    }

    let b_batch: Vec<Instance> = b_idx.iter().map(|&i| batch[i].clone()).collect();
    let mut c_idx = Vec::new();
    if !b_batch.is_empty() {
        for (&i, preds) in b_idx.iter().zip(ensemble.score(Level::B, &b_batch)?) {
            let score = aggregate(&positive_confidences(&preds, ClassLabel::Unt))?;
            if gate_level_c(&score, gates) {
                c_idx.push(i);
            }
            records[i].level_b = Some(score);
        }
    }

    let c_batch: Vec<Instance> = c_idx.iter().map(|&i| batch[i].clone()).collect();
    if !c_batch.is_empty() {
        for (&i, preds) in c_idx.iter().zip(ensemble.score(Level::C, &c_batch)?) {
            let [ind, grp, oth] = [ClassLabel::Ind, ClassLabel::Grp, ClassLabel::Oth]
                .map(|c| aggregate(&positive_confidences(&preds, c)));
            let scores: [AggregateScore; 3] = [ind?, grp?, oth?];
            records[i].level_c = Some(scores);
        }
    }
    Ok(records.into_iter().zip(a_preds).collect())
}

/// One instance's record and its Level A predictions.
type Scored = (DistantRecord, Vec<ModelPrediction>);

/// Scores `corpus` through the three-level cascade.
pub fn run_cascade(
    ensemble: &Ensemble,
    mut corpus: Vec<Instance>,
    opts: &CascadeOptions,
) -> Result<CascadeOutput> {
    ensemble.validate()?;
    let mut seen = HashSet::with_capacity(corpus.len());
    for (row, inst) in corpus.iter().enumerate() {
        if !seen.insert(inst.id.as_str()) {
            return Err(Error::DuplicateId {
                id: inst.id.clone(),
                row: row + 1,
            });
        }
    }
    drop(seen);
    corpus.sort_by(|a, b| a.id.cmp(&b.id));

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.threads.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let batch_size = opts.batch_size.max(1);
    let results: Vec<Result<Vec<Scored>>> = pool.install(|| {
        corpus
            .par_chunks(batch_size)
            .map(|batch| {
                run_batch(ensemble, batch, &opts.gates).map_err(|e| Error::Scoring {
                    first: batch[0].id.clone(),
                    last: batch[batch.len() - 1].id.clone(),
                    source: Box::new(e),
                })
            })
            .collect()
    });

    let mut out = CascadeOutput::default();
    for r in results {
        for (record, preds) in r? {
            out.records.push(record);
            out.level_a.push(preds);
        }
    }
    Ok(out)
}
