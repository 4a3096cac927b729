//! Curating distant scores into training material.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledInstance;
use crate::cotrain::DistantRecord;
use crate::error::{Error, Result};
use crate::label::{ClassLabel, Level};
use crate::models::{ModelKind, ModelPrediction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Below,
    Above,
}

/// `avg(class) < threshold` or `avg(class) > threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub class: ClassLabel,
    pub side: Side,
    pub threshold: f64,
}

impl Condition {
    pub fn holds(&self, average: f64) -> bool {
        match self.side {
            Side::Below => average < self.threshold,
            Side::Above => average > self.threshold,
        }
    }
}

/// Accepts a record when any of its conditions holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionPolicy {
    pub level: Level,
    pub any_of: Vec<Condition>,
}

impl SelectionPolicy {
    pub fn new(level: Level, any_of: Vec<Condition>) -> Result<Self> {
        for c in &any_of {
            if !(0.0..=1.0).contains(&c.threshold) {
                return Err(Error::invalid(format!("threshold {} outside [0, 1]", c.threshold)));
            }
            if c.class.level() != level {
                return Err(Error::invalid(format!("{} is not a Level {level} class", c.class)));
            }
        }
        if any_of.is_empty() {
            return Err(Error::invalid("selection policy has no conditions"));
        }
        Ok(SelectionPolicy { level, any_of })
    }

    pub fn default_for(level: Level) -> Self {
        use ClassLabel::*;
        use Side::*;
        let c = |class, side, threshold| Condition { class, side, threshold };
        let any_of = match level {
            Level::A => vec![c(Off, Below, 0.2), c(Off, Above, 0.7)],
            Level::B => vec![c(Unt, Below, 0.3), c(Unt, Above, 0.7)],
            Level::C => vec![c(Ind, Above, 0.8), c(Grp, Above, 0.7), c(Oth, Above, 0.65)],
        };
        SelectionPolicy { level, any_of }
    }

    pub fn accepts(&self, record: &DistantRecord) -> Result<bool> {
        if !record.has_level(self.level) {
            return Err(Error::invalid(format!(
                "record `{}` has no Level {} scores",
                record.id, self.level
            )));
        }
        Ok(self.any_of.iter().any(|c| {
            let avg = record.average(c.class).expect("record has this level");
            c.holds(avg)
        }))
    }
}

/// Ids of the selected records, sorted. At Levels B and C only
/// records that reached the level are considered.
pub fn select_training<'a>(
    records: impl IntoIterator<Item = &'a DistantRecord>,
    policy: &SelectionPolicy,
) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut considered = 0usize;
    for r in records {
        if policy.level != Level::A && !r.has_level(policy.level) {
            continue;
        }
        considered += 1;
        if policy.accepts(r)? {
            out.push(r.id.clone());
        }
    }
    if considered == 0 && policy.level != Level::A {
        return Err(Error::invalid(format!("no record carries Level {} scores", policy.level)));
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Difficulty {
    Easy,
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bucket {
    pub difficulty: Difficulty,
    pub polarity: ClassLabel,
}

impl Bucket {
    /// Evaluation priority order.
    pub const ORDER: [Bucket; 4] = [
        Bucket { difficulty: Difficulty::Easy, polarity: ClassLabel::Off },
        Bucket { difficulty: Difficulty::Hard, polarity: ClassLabel::Off },
        Bucket { difficulty: Difficulty::Hard, polarity: ClassLabel::Not },
        Bucket { difficulty: Difficulty::Easy, polarity: ClassLabel::Not },
    ];
}

impl fmt::Display for Difficulty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Difficulty::Easy => "easy",
            Difficulty::Hard => "hard",
        })
    }
}

impl FromStr for Difficulty {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "easy" => Ok(Difficulty::Easy),
            "hard" => Ok(Difficulty::Hard),
            other => Err(Error::invalid(format!("unknown difficulty `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BucketThresholds {
    pub easy_off: f64,
    pub hard_off: f64,
    pub hard_not: f64,
    /// Bound on the first continuous model for Easy NOT.
    pub easy_not_first: f64,
    /// Bound on the remaining continuous models for Easy NOT.
    pub easy_not_rest: f64,
}

impl Default for BucketThresholds {
    fn default() -> Self {
        BucketThresholds {
            easy_off: 0.8,
            hard_off: 0.5,
            hard_not: 0.5,
            easy_not_first: 0.2,
            easy_not_rest: 0.8,
        }
    }
}

/// Assigns a Level A easy/hard bucket from per-model predictions given in
/// ensemble order. Conditions are tried in [`Bucket::ORDER`]; the first that
/// holds wins.
pub fn partition_easy_hard(preds: &[ModelPrediction], t: &BucketThresholds) -> Result<Option<Bucket>> {
    if preds.is_empty() {
        return Err(Error::invalid("no predictions to partition"));
    }
    if let Some(p) = preds.iter().find(|p| p.level != Level::A) {
        return Err(Error::invalid(format!("prediction from `{}` is not Level A", p.model_name)));
    }
    let cont: Vec<f64> = preds
        .iter()
        .filter(|p| p.kind == ModelKind::Continuous)
        .map(|p| p.confidence(ClassLabel::Off))
        .collect();
    let disc = |label| {
        preds
            .iter()
            .filter(|p| p.kind == ModelKind::Discrete)
            .all(|p| p.hard_label == label)
    };
    let all = |f: &dyn Fn(f64) -> bool| cont.iter().all(|&c| f(c));
    let [easy_off, hard_off, hard_not, easy_not] = Bucket::ORDER;
    Ok(if all(&|c| c >= t.easy_off) && disc(ClassLabel::Off) {
        Some(easy_off)
    } else if all(&|c| c >= t.hard_off) && disc(ClassLabel::Off) {
        Some(hard_off)
    } else if all(&|c| c < t.hard_not) && disc(ClassLabel::Not) {
        Some(hard_not)
    } else if cont.first().is_none_or(|&c| c <= t.easy_not_first)
        && cont.iter().skip(1).all(|&c| c <= t.easy_not_rest)
        && disc(ClassLabel::Not)
    {
        Some(easy_not)
    } else {
        None
    })
}

pub const BUCKETS_HEADER: &str = "id,difficulty,polarity";

pub fn write_buckets<'a, W: Write>(
    mut out: W,
    rows: impl IntoIterator<Item = (&'a str, Bucket)>,
) -> Result<()> {
    writeln!(out, "{BUCKETS_HEADER}")?;
    for (id, b) in rows {
        writeln!(out, "{id},{},{}", b.difficulty, b.polarity)?;
    }
    Ok(())
}

pub fn read_buckets<R: std::io::BufRead>(input: R) -> Result<BTreeMap<String, Bucket>> {
    let mut out = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim_end() != BUCKETS_HEADER {
                return Err(Error::parse(1, format!("expected header `{BUCKETS_HEADER}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        let bad = |m: String| Error::parse(i + 1, m);
        if cols.len() != 3 {
            return Err(bad("expected 3 columns".into()));
        }
        let difficulty: Difficulty = cols[1].parse().map_err(|e: Error| bad(e.to_string()))?;
        let polarity = ClassLabel::parse_for(Level::A, cols[2]).map_err(|e| bad(e.to_string()))?;
        out.insert(cols[0].to_string(), Bucket { difficulty, polarity });
    }
    Ok(out)
}

/// Tops every minority class up to the size of the largest class by drawing
/// extra copies with replacement. Originals are kept in place; draws are
/// appended class by class.
pub fn upsample_balance(data: &[LabeledInstance], level: Level, seed: u64) -> Result<Vec<LabeledInstance>> {
    let classes = level.classes();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
    for (i, d) in data.iter().enumerate() {
        let class = d.label.at(level).ok_or_else(|| {
            Error::invalid(format!("instance `{}` has no Level {level} label", d.instance.id))
        })?;
        by_class[level.index_of(class).expect("label level")].push(i);
    }
    if let Some(ci) = by_class.iter().position(Vec::is_empty) {
        return Err(Error::invalid(format!("class {} has no instances", classes[ci])));
    }
    let k = by_class.iter().map(Vec::len).max().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = data.to_vec();
    for members in &by_class {
        for _ in members.len()..k {
            out.push(data[members[rng.gen_range(0..members.len())]].clone());
        }
    }
    Ok(out)
}

/// Loss weights per class; only Level C is reweighted.
pub fn class_weights(level: Level) -> BTreeMap<ClassLabel, f64> {
    let weights: &[f64] = match level {
        Level::A | Level::B => &[1.0, 1.0],
        Level::C => &[1.0, 2.0, 10.0],
    };
    level.classes().iter().copied().zip(weights.iter().copied()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataSource {
    Gold,
    Distant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Phase {
    pub source: DataSource,
    pub epochs: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurriculumSchedule {
    phases: Vec<Phase>,
}

impl CurriculumSchedule {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::invalid("curriculum needs at least one phase"));
        }
        if phases.iter().any(|p| p.epochs == 0) {
            return Err(Error::invalid("curriculum phases need at least one epoch"));
        }
        Ok(CurriculumSchedule { phases })
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }
}

/// Distant data first at Level A; gold first at Levels B and C.
pub fn build_curriculum(level: Level) -> CurriculumSchedule {
    let p = |source, epochs| Phase { source, epochs };
    let phases = match level {
        Level::A => vec![p(DataSource::Distant, 1), p(DataSource::Gold, 2)],
        Level::B | Level::C => vec![p(DataSource::Gold, 2), p(DataSource::Distant, 1)],
    };
    CurriculumSchedule { phases }
}

impl fmt::Display for CurriculumSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .phases
            .iter()
            .map(|p| {
                let src = match p.source {
                    DataSource::Gold => "gold",
                    DataSource::Distant => "distant",
                };
                format!("{src}:{}", p.epochs)
            })
            .collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for CurriculumSchedule {
    type Err = Error;

    /// `gold:2,distant:1`
    fn from_str(s: &str) -> Result<Self> {
        let mut phases = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (src, n) = part
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("bad curriculum phase `{part}`")))?;
            let source = match src.trim() {
                "gold" => DataSource::Gold,
                "distant" => DataSource::Distant,
                other => return Err(Error::invalid(format!("unknown data source `{other}`"))),
            };
            let epochs = n
                .trim()
                .parse()
                .map_err(|_| Error::invalid(format!("bad epoch count `{n}`")))?;
            phases.push(Phase { source, epochs });
        }
        CurriculumSchedule::new(phases)
    }
}
