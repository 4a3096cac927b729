//! The diverse classifier suite and the scorer abstraction the cascade runs.

mod codec;
pub mod external;
pub mod lexicon;
pub mod linear;
mod persist;
pub mod pmi;

use serde::{Deserialize, Serialize};

use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::label::{ClassLabel, Level};

pub use external::ExternalScorer;
pub use lexicon::LexiconModel;
pub use linear::{LinearConfig, LinearModel};
pub use persist::{hex_digest, NativeModel, FORMAT_VERSION, MAGIC};
pub use pmi::{PmiConfig, PmiModel};

/// How the cascade gates read a model: continuous models are thresholded on
/// their confidence, discrete models are read through their hard label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Continuous,
    Discrete,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Continuous => "continuous",
            ModelKind::Discrete => "discrete",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(ModelKind::Continuous),
            "discrete" => Ok(ModelKind::Discrete),
            other => Err(Error::invalid(format!("unknown model kind `{other}`"))),
        }
    }
}

/// One model's per-class confidences for one instance at one level.
/// `confidences` is aligned with `level.classes()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelPrediction {
    pub model_name: String,
    pub kind: ModelKind,
    pub level: Level,
    pub confidences: Vec<f64>,
    pub hard_label: ClassLabel,
}

impl ModelPrediction {
    /// Builds a prediction whose hard label is the argmax of `confidences`.
    pub fn from_confidences(
        model_name: impl Into<String>,
        kind: ModelKind,
        level: Level,
        confidences: Vec<f64>,
    ) -> Self {
        let hard_label = level.classes()[argmax(&confidences)];
        ModelPrediction {
            model_name: model_name.into(),
            kind,
            level,
            confidences,
            hard_label,
        }
    }

    pub fn confidence(&self, class: ClassLabel) -> f64 {
        self.level
            .index_of(class)
            .map_or(0.0, |i| self.confidences[i])
    }

    /// Confidence of the level's positive class (OFF at A, UNT at B).
    pub fn positive(&self) -> f64 {
        self.confidence(
            self.level
                .positive_class()
                .expect("Level C has no single positive class"),
        )
    }
}

/// Index of the largest value; ties go to the earliest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Softmax of `scores / temperature`. Infinite scores are allowed: all mass
/// goes to the `+inf` entries if there are any.
pub fn softmax(scores: &[f64], temperature: f64) -> Vec<f64> {
    let n = scores.len();
    let pos_inf = scores.iter().filter(|s| **s == f64::INFINITY).count();
    if pos_inf > 0 {
        return scores
            .iter()
            .map(|&s| if s == f64::INFINITY { 1.0 / pos_inf as f64 } else { 0.0 })
            .collect();
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return vec![1.0 / n as f64; n];
    }
    let exps: Vec<f64> = scores.iter().map(|&s| ((s - max) / temperature).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Anything that can score instances at one or more taxonomy levels.
pub trait Scorer: Send + Sync {
    fn name(&self) -> &str;

    fn kind(&self) -> ModelKind;

    fn levels(&self) -> Vec<Level>;

    /// One prediction per instance, in order.
    fn score(&self, level: Level, batch: &[Instance]) -> Result<Vec<ModelPrediction>>;
}

pub(crate) fn check_level(name: &str, served: &[Level], level: Level) -> Result<()> {
    if served.contains(&level) {
        Ok(())
    } else {
        Err(Error::invalid(format!("model `{name}` does not score Level {level}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_breaks_ties_by_class_order() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
        let p = ModelPrediction::from_confidences("m", ModelKind::Continuous, Level::C, vec![0.2, 0.4, 0.4]);
        assert_eq!(p.hard_label, ClassLabel::Grp);
    }

    #[test]
    fn softmax_handles_infinities() {
        let p = softmax(&[f64::INFINITY, f64::NEG_INFINITY], 10.0);
        assert_eq!(p, vec![1.0, 0.0]);
        let p = softmax(&[f64::NEG_INFINITY, f64::NEG_INFINITY], 10.0);
        assert_eq!(p, vec![0.5, 0.5]);
        let p = softmax(&[1.0, 2.0, 3.0], 1.0);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(p[2] > p[1] && p[1] > p[0]);
    }
}
