//! Browser demo. Every export takes and returns JSON strings so the page
//! needs no bindings beyond `wasm-bindgen`'s string glue.
//!
//! The plain functions are what the tests call; the `js_*` wrappers are the
//! wasm exports.

use std::sync::OnceLock;

use colabel::corpus::synth::{self, SynthConfig};
use colabel::corpus::{tokenize, Instance};
use colabel::cotrain::{aggregate, gate_level_b, GateConfig};
use colabel::models::{LexiconModel, ModelKind, ModelPrediction, PmiConfig, PmiModel};
use colabel::select::{partition_easy_hard, BucketThresholds};
use colabel::{ClassLabel, Level};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

/// One Level A ensemble member as entered on the page.
#[derive(Debug, Clone, Deserialize)]
pub struct MemberInput {
    pub name: String,
    pub kind: ModelKind,
    pub off: f64,
}

#[derive(Debug, Serialize)]
pub struct EnsembleView {
    pub average: f64,
    pub std: f64,
    pub passes_level_b_gate: bool,
    /// `"easy OFF"`, `"hard NOT"`, ... or null when no rule matches.
    pub bucket: Option<String>,
}

#[derive(Debug, Serialize)]
struct Failure {
    error: String,
}

fn to_json<T: Serialize>(r: Result<T, String>) -> String {
    match r {
        Ok(v) => serde_json::to_string(&v),
        Err(error) => serde_json::to_string(&Failure { error }),
    }
    .expect("demo types serialize")
}

/// Aggregates the members' OFF confidences, applies the Level B gate and
/// assigns the easy/hard bucket.
pub fn explore_ensemble(members: &[MemberInput], b_min_confidence: f64) -> Result<EnsembleView, String> {
    let preds: Vec<ModelPrediction> = members
        .iter()
        .map(|m| {
            if !(0.0..=1.0).contains(&m.off) {
                return Err(format!("{}: confidence {} outside [0, 1]", m.name, m.off));
            }
            Ok(ModelPrediction::from_confidences(m.name.clone(), m.kind, Level::A, vec![m.off, 1.0 - m.off]))
        })
        .collect::<Result<_, _>>()?;
    let pairs: Vec<(String, f64)> = members.iter().map(|m| (m.name.clone(), m.off)).collect();
    let score = aggregate(&pairs).map_err(|e| e.to_string())?;
    let names: Vec<&str> = members.iter().map(|m| m.name.as_str()).collect();
    let gates = GateConfig { b_min_confidence, ..GateConfig::default() };
    let passes = gate_level_b(&names, &preds, &gates).map_err(|e| e.to_string())?;
    let bucket = partition_easy_hard(&preds, &BucketThresholds::default()).map_err(|e| e.to_string())?;
    Ok(EnsembleView {
        average: score.average,
        std: score.std,
        passes_level_b_gate: passes,
        bucket: bucket.map(|b| format!("{} {}", b.difficulty, b.polarity)),
    })
}

#[derive(Debug, Serialize)]
pub struct Classification {
    pub tokens: Vec<String>,
    pub pmi_off: f64,
    pub pmi_label: ClassLabel,
    /// Unigrams the PMI model knows, with their OFF-orientation score.
    pub evidence: Vec<(String, f64)>,
    pub lexicon_off: f64,
    pub lexicon_label: ClassLabel,
}

/// PMI model trained once on a synthetic corpus.
fn toy_pmi() -> &'static PmiModel {
    static MODEL: OnceLock<PmiModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let data = synth::labeled(600, &SynthConfig { noise: 0.05, ..SynthConfig::default() });
        PmiModel::train(&data, Level::A, PmiConfig::default()).expect("synthetic corpus has both classes")
    })
}

/// Scores `text` with the toy PMI model at the given softmax temperature and
/// with the curse lexicon.
pub fn classify(text: &str, temperature: f64) -> Result<Classification, String> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(format!("temperature must be positive, got {temperature}"));
    }
    let mut pmi = toy_pmi().clone();
    pmi.config.temperature = temperature;
    let inst = Instance::new("demo", text);
    let p = pmi.predict(&inst);
    let l = LexiconModel::default().predict(&inst);
    let tokens = tokenize(text);
    let evidence = tokens
        .iter()
        .filter_map(|t| pmi.pmi_so_score(t, ClassLabel::Off).map(|s| (t.clone(), s)))
        .collect();
    Ok(Classification {
        tokens,
        pmi_off: p.confidence(ClassLabel::Off),
        pmi_label: p.hard_label,
        evidence,
        lexicon_off: l.confidence(ClassLabel::Off),
        lexicon_label: l.hard_label,
    })
}

/// A few lines from the synthetic corpus to seed the text box.
pub fn sample_texts(n: usize, seed: u64) -> Vec<String> {
    synth::raw(n, &SynthConfig { noise: 0.05, seed, ..SynthConfig::default() })
        .into_iter()
        .map(|r| r.text)
        .collect()
}

#[wasm_bindgen]
pub fn js_explore_ensemble(members_json: &str, b_min_confidence: f64) -> String {
    to_json(
        serde_json::from_str::<Vec<MemberInput>>(members_json)
            .map_err(|e| format!("bad members: {e}"))
            .and_then(|m| explore_ensemble(&m, b_min_confidence)),
    )
}

#[wasm_bindgen]
pub fn js_classify(text: &str, temperature: f64) -> String {
    to_json(classify(text, temperature))
}

#[wasm_bindgen]
pub fn js_sample_texts(n: usize, seed: u32) -> String {
    to_json(Ok(sample_texts(n, seed as u64)))
}
