//! Democratic co-training: the ensemble scores every unlabeled instance, the
//! per-model confidences are aggregated into a mean and a population standard
//! deviation, and cascade gates decide which instances descend to Levels B
//! and C.

mod cascade;
mod io;

use serde::{Deserialize, Serialize};

pub use cascade::{run_cascade, CascadeOptions, CascadeOutput, Ensemble, Member};
pub use io::{
    read_distant, read_predictions_a, write_distant, write_predictions_a, LEVEL_A_HEADER,
    LEVEL_B_HEADER, LEVEL_C_HEADER, PREDICTIONS_A_HEADER,
};

use crate::error::{Error, Result};
use crate::label::{ClassLabel, HierLabel, Level};
use crate::models::{ModelKind, ModelPrediction};

/// Mean and population standard deviation of one class's confidences across
/// the ensemble. `per_model` is empty for scores read back from CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateScore {
    pub average: f64,
    pub std: f64,
    pub per_model: Vec<(String, f64)>,
}

pub fn aggregate(confidences: &[(String, f64)]) -> Result<AggregateScore> {
    if confidences.len() < 2 {
        return Err(Error::invalid(format!(
            "aggregation needs at least 2 models, got {}",
            confidences.len()
        )));
    }
    if let Some((name, v)) = confidences.iter().find(|(_, v)| !(0.0..=1.0).contains(v)) {
        return Err(Error::invalid(format!(
            "confidence {v} of model `{name}` outside [0, 1]"
        )));
    }
    let (average, std) = mean_std(confidences.iter().map(|(_, v)| *v));
    Ok(AggregateScore {
        average,
        std,
        per_model: confidences.to_vec(),
    })
}

/// Mean and population (divide-by-N) standard deviation. Values are summed
/// in sorted order so the result does not depend on input order.
fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let mut sq: Vec<f64> = v.iter().map(|x| (x - mean) * (x - mean)).collect();
    sq.sort_by(f64::total_cmp);
    (mean, (sq.iter().sum::<f64>() / n).sqrt())
}

/// Cascade output for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistantRecord {
    pub id: String,
    /// Aggregate over the OFF confidence.
    pub level_a: AggregateScore,
    /// Aggregate over the UNT confidence, present iff the Level B gate held.
    pub level_b: Option<AggregateScore>,
    /// IND, GRP, OTH aggregates, present iff the Level C gate held.
    pub level_c: Option<[AggregateScore; 3]>,
}

impl DistantRecord {
    pub fn average(&self, class: ClassLabel) -> Option<f64> {
        match class {
            ClassLabel::Off => Some(self.level_a.average),
            ClassLabel::Not => Some(1.0 - self.level_a.average),
            ClassLabel::Unt => self.level_b.as_ref().map(|s| s.average),
            ClassLabel::Tin => self.level_b.as_ref().map(|s| 1.0 - s.average),
            c => {
                let i = Level::C.index_of(c).expect("Level C class");
                self.level_c.as_ref().map(|s| s[i].average)
            }
        }
    }

    pub fn has_level(&self, level: Level) -> bool {
        match level {
            Level::A => true,
            Level::B => self.level_b.is_some(),
            Level::C => self.level_c.is_some(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    /// Minimum OFF confidence of every continuous model for Level B.
    pub b_min_confidence: f64,
    /// Level C requires avg(UNT) below this ("likely TIN").
    pub c_max_unt: f64,
    /// Level C requires std(UNT) below this.
    pub c_max_std: f64,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            b_min_confidence: 0.5,
            c_max_unt: 0.5,
            c_max_std: 0.25,
        }
    }
}

/// Level B gate: every continuous model is confident the instance is OFF and
/// every discrete model labels it OFF. `members` lists the Level A ensemble;
/// each must have a prediction in `preds`.
pub fn gate_level_b(members: &[&str], preds: &[ModelPrediction], cfg: &GateConfig) -> Result<bool> {
    if members.is_empty() {
        return Err(Error::invalid("empty Level A ensemble"));
    }
    let mut pass = true;
    for name in members {
        let p = preds
            .iter()
            .find(|p| p.model_name == *name)
            .ok_or_else(|| Error::invalid(format!("missing Level A prediction from `{name}`")))?;
        if p.level != Level::A {
            return Err(Error::invalid(format!("prediction from `{name}` is not Level A")));
        }
        pass &= match p.kind {
            ModelKind::Continuous => p.confidence(ClassLabel::Off) >= cfg.b_min_confidence,
            ModelKind::Discrete => p.hard_label == ClassLabel::Off,
        };
    }
    Ok(pass)
}

/// Level C gate: likely TIN with low disagreement.
pub fn gate_level_c(b_score: &AggregateScore, cfg: &GateConfig) -> bool {
    b_score.average < cfg.c_max_unt && b_score.std < cfg.c_max_std
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistillThresholds {
    pub off: f64,
    pub unt: f64,
}

impl Default for DistillThresholds {
    fn default() -> Self {
        DistillThresholds { off: 0.5, unt: 0.5 }
    }
}

/// Hard hierarchical label from aggregate scores. Deeper levels are filled
/// only where the record has scores and the parent label admits them.
pub fn distill_labels(record: &DistantRecord, t: &DistillThresholds) -> Result<HierLabel> {
    for (name, v) in [("off", t.off), ("unt", t.unt)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("threshold {name}={v} outside [0, 1]")));
        }
    }
    if record.level_a.average < t.off {
        return Ok(HierLabel::not());
    }
    let b = record.level_b.as_ref().map(|s| {
        if s.average >= t.unt {
            ClassLabel::Unt
        } else {
            ClassLabel::Tin
        }
    });
    let c = match (&record.level_c, b) {
        (Some(scores), Some(ClassLabel::Tin)) => {
            let avgs: Vec<f64> = scores.iter().map(|s| s.average).collect();
            Some(Level::C.classes()[crate::models::argmax(&avgs)])
        }
        _ => None,
    };
    HierLabel::new(ClassLabel::Off, b, c)
}
