//! Macro-F1 reports, inter-annotator agreement and score histograms.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{ClassLabel, Level};
use crate::select::{Bucket, Difficulty};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Slice {
    Full,
    Easy,
    Hard,
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Slice::Full => "full",
            Slice::Easy => "easy",
            Slice::Hard => "hard",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

pub const ZERO_DIVISION_NOTE: &str = "precision, recall and f1 are 0 when their denominator is 0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub level: Level,
    pub slice: Slice,
    pub instances: usize,
    /// Mean f1 over the classes present in gold; 0 for an empty slice.
    pub macro_f1: f64,
    /// Classes present in gold.
    pub per_class: BTreeMap<ClassLabel, ClassScores>,
    /// `confusion[gold][pred]` over every class of the level.
    pub confusion: BTreeMap<ClassLabel, BTreeMap<ClassLabel, usize>>,
    pub zero_division: String,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn check_level(level: Level, id: &str, label: ClassLabel) -> Result<()> {
    if label.level() != level {
        return Err(Error::invalid(format!("label {label} of `{id}` is not a Level {level} class")));
    }
    Ok(())
}

fn report(
    level: Level,
    slice: Slice,
    pairs: impl IntoIterator<Item = (ClassLabel, ClassLabel)>,
) -> EvalReport {
    let classes = level.classes();
    let mut confusion: BTreeMap<ClassLabel, BTreeMap<ClassLabel, usize>> = classes
        .iter()
        .map(|&g| (g, classes.iter().map(|&p| (p, 0)).collect()))
        .collect();
    let mut instances = 0;
    for (g, p) in pairs {
        *confusion.get_mut(&g).unwrap().get_mut(&p).unwrap() += 1;
        instances += 1;
    }
    let mut per_class = BTreeMap::new();
    for &c in classes {
        let support: usize = confusion[&c].values().sum();
        if support == 0 {
            continue;
        }
        let tp = confusion[&c][&c];
        let predicted: usize = classes.iter().map(|g| confusion[g][&c]).sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        per_class.insert(c, ClassScores { precision, recall, f1, support });
    }
    let macro_f1 = if per_class.is_empty() {
        0.0
    } else {
        per_class.values().map(|s| s.f1).sum::<f64>() / per_class.len() as f64
    };
    EvalReport {
        level,
        slice,
        instances,
        macro_f1,
        per_class,
        confusion,
        zero_division: ZERO_DIVISION_NOTE.to_string(),
    }
}

fn paired<'a>(
    level: Level,
    gold: &'a HashMap<String, ClassLabel>,
    pred: &'a HashMap<String, ClassLabel>,
) -> Result<Vec<(&'a str, ClassLabel, ClassLabel)>> {
    if let Some(id) = gold.keys().find(|id| !pred.contains_key(*id)) {
        return Err(Error::invalid(format!("no prediction for `{id}`")));
    }
    if let Some(id) = pred.keys().find(|id| !gold.contains_key(*id)) {
        return Err(Error::invalid(format!("prediction for unknown id `{id}`")));
    }
    let mut out = Vec::with_capacity(gold.len());
    for (id, &g) in gold {
        let p = pred[id];
        check_level(level, id, g)?;
        check_level(level, id, p)?;
        out.push((id.as_str(), g, p));
    }
    Ok(out)
}

pub fn macro_f1(
    level: Level,
    gold: &HashMap<String, ClassLabel>,
    pred: &HashMap<String, ClassLabel>,
) -> Result<EvalReport> {
    let pairs = paired(level, gold, pred)?;
    Ok(report(level, Slice::Full, pairs.into_iter().map(|(_, g, p)| (g, p))))
}

/// Full, Easy and Hard reports. Ids without a bucket count only towards Full.
pub fn evaluate_buckets(
    level: Level,
    gold: &HashMap<String, ClassLabel>,
    pred: &HashMap<String, ClassLabel>,
    buckets: &BTreeMap<String, Bucket>,
) -> Result<Vec<EvalReport>> {
    let pairs = paired(level, gold, pred)?;
    if let Some(id) = buckets.keys().find(|id| !gold.contains_key(*id)) {
        return Err(Error::invalid(format!("bucketed id `{id}` has no gold label")));
    }
    let slice = |d: Difficulty| {
        pairs
            .iter()
            .filter(move |(id, _, _)| buckets.get(*id).is_some_and(|b| b.difficulty == d))
            .map(|&(_, g, p)| (g, p))
    };
    Ok(vec![
        report(level, Slice::Full, pairs.iter().map(|&(_, g, p)| (g, p))),
        report(level, Slice::Easy, slice(Difficulty::Easy)),
        report(level, Slice::Hard, slice(Difficulty::Hard)),
    ])
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "level {}  slice {}  n={}  macro-F1 {:.4}",
            self.level, self.slice, self.instances, self.macro_f1
        );
        let _ = writeln!(s, "{:<6} {:>9} {:>9} {:>9} {:>8}", "class", "precision", "recall", "f1", "support");
        for (c, m) in &self.per_class {
            let _ = writeln!(
                s,
                "{:<6} {:>9.4} {:>9.4} {:>9.4} {:>8}",
                c.as_str(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            );
        }
        let _ = write!(s, "{:<10}", "gold\\pred");
        for p in self.level.classes() {
            let _ = write!(s, " {:>7}", p.as_str());
        }
        s.push('\n');
        for (g, row) in &self.confusion {
            let _ = write!(s, "{:<10}", g.as_str());
            for n in row.values() {
                let _ = write!(s, " {n:>7}");
            }
            s.push('\n');
        }
        s
    }
}

/// Per-item label lists with the same number of annotators on every item.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet {
    items: BTreeMap<String, Vec<String>>,
    annotators: usize,
}

impl AnnotationSet {
    pub fn new(items: BTreeMap<String, Vec<String>>) -> Result<Self> {
        let mut annotators = None;
        for (id, labels) in &items {
            if labels.is_empty() {
                return Err(Error::invalid(format!("item `{id}` has no annotations")));
            }
            match annotators {
                None => annotators = Some(labels.len()),
                Some(n) if n != labels.len() => {
                    return Err(Error::invalid(format!(
                        "item `{id}` has {} annotations, expected {n}",
                        labels.len()
                    )))
                }
                _ => {}
            }
        }
        let annotators = annotators.ok_or_else(|| Error::invalid("annotation set is empty"))?;
        if annotators < 2 {
            return Err(Error::invalid("agreement needs at least two annotators"));
        }
        Ok(AnnotationSet { items, annotators })
    }

    pub fn annotators(&self) -> usize {
        self.annotators
    }

    pub fn items(&self) -> &BTreeMap<String, Vec<String>> {
        &self.items
    }
}

/// Observed agreement: mean over items of the share of annotators choosing
/// the item's most frequent label.
pub fn iaa_p0(ann: &AnnotationSet) -> f64 {
    let mut total = 0.0;
    for labels in ann.items.values() {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        for l in labels {
            *counts.entry(l.as_str()).or_default() += 1;
        }
        let modal = counts.values().copied().max().unwrap_or(0);
        total += modal as f64 / ann.annotators as f64;
    }
    total / ann.items.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    /// Values above `hi`, plus NaN.
    pub overflow: u64,
}

impl Histogram {
    pub fn new(bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("histogram needs at least one bin"));
        }
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::invalid(format!("bad histogram range [{lo}, {hi}]")));
        }
        Ok(Histogram { lo, hi, counts: vec![0; bins], underflow: 0, overflow: 0 })
    }

    /// Bins are half-open `[lo, hi)` except the last, which includes `hi`.
    pub fn add(&mut self, x: f64) {
        if x < self.lo {
            self.underflow += 1;
        } else if x > self.hi || x.is_nan() {
            self.overflow += 1;
        } else {
            let n = self.counts.len();
            let i = ((x - self.lo) / (self.hi - self.lo) * n as f64) as usize;
            self.counts[i.min(n - 1)] += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        let lo = self.lo + w * i as f64;
        let hi = if i + 1 == self.counts.len() { self.hi } else { self.lo + w * (i + 1) as f64 };
        (lo, hi)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "bin_lo,bin_hi,count")?;
        for (i, c) in self.counts.iter().enumerate() {
            let (lo, hi) = self.bin_edges(i);
            writeln!(out, "{lo:.6},{hi:.6},{c}")?;
        }
        Ok(())
    }

    pub fn to_text(&self, width: usize) -> String {
        let max = self.counts.iter().copied().max().unwrap_or(0);
        let mut s = String::new();
        for (i, &c) in self.counts.iter().enumerate() {
            let (lo, hi) = self.bin_edges(i);
            let bar = if max == 0 { 0 } else { (c as f64 / max as f64 * width as f64).round() as usize };
            let _ = writeln!(s, "[{lo:.3}, {hi:.3}) {c:>9} {}", "#".repeat(bar));
        }
        let _ = writeln!(s, "underflow {}  overflow {}", self.underflow, self.overflow);
        s
    }
}

pub fn score_histogram(scores: impl IntoIterator<Item = f64>, bins: usize, lo: f64, hi: f64) -> Result<Histogram> {
    let mut h = Histogram::new(bins, lo, hi)?;
    for x in scores {
        h.add(x);
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use ClassLabel::*;

    fn map(labels: &[ClassLabel]) -> HashMap<String, ClassLabel> {
        labels.iter().enumerate().map(|(i, &l)| (i.to_string(), l)).collect()
    }

    #[test]
    fn hand_computed_confusion() {
        let r = macro_f1(Level::A, &map(&[Off, Off, Not, Not]), &map(&[Off, Not, Not, Not])).unwrap();
        assert!((r.per_class[&Off].f1 - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.per_class[&Not].f1 - 0.8).abs() < 1e-12);
        assert!((r.macro_f1 - 0.7333).abs() < 1e-4);
        assert_eq!(r.confusion[&Off][&Not], 1);
        let total: usize = r.confusion.values().flat_map(|row| row.values()).sum();
        assert_eq!(total, r.per_class.values().map(|s| s.support).sum::<usize>());
    }

    #[test]
    fn perfect_and_flipped() {
        let gold = map(&[Off, Not, Not]);
        assert_eq!(macro_f1(Level::A, &gold, &gold).unwrap().macro_f1, 1.0);
        let flipped = map(&[Not, Off, Off]);
        assert_eq!(macro_f1(Level::A, &gold, &flipped).unwrap().macro_f1, 0.0);
    }

    #[test]
    fn mismatched_inputs_are_rejected() {
        let gold = map(&[Off, Not]);
        assert!(macro_f1(Level::A, &gold, &map(&[Off])).is_err());
        assert!(macro_f1(Level::A, &map(&[Off]), &gold).is_err());
        assert!(macro_f1(Level::B, &gold, &gold).is_err());
    }

    #[test]
    fn bucket_slices_add_up() {
        let gold = map(&[Off, Off, Not, Not, Off]);
        let pred = map(&[Off, Not, Not, Off, Off]);
        let easy = Bucket { difficulty: Difficulty::Easy, polarity: Off };
        let hard = Bucket { difficulty: Difficulty::Hard, polarity: Not };
        let buckets: BTreeMap<_, _> =
            [("0", easy), ("1", hard), ("2", easy), ("3", hard)].map(|(i, b)| (i.to_string(), b)).into();
        let reps = evaluate_buckets(Level::A, &gold, &pred, &buckets).unwrap();
        assert_eq!(reps.iter().map(|r| r.slice).collect::<Vec<_>>(), [Slice::Full, Slice::Easy, Slice::Hard]);
        assert_eq!(reps[1].macro_f1, 1.0);
        assert_eq!(reps[1].instances + reps[2].instances, 4);

        let all_easy: BTreeMap<_, _> = gold.keys().map(|id| (id.clone(), easy)).collect();
        let reps = evaluate_buckets(Level::A, &gold, &pred, &all_easy).unwrap();
        assert_eq!(EvalReport { slice: Slice::Full, ..reps[1].clone() }, reps[0]);
        assert_eq!(reps[2].instances, 0);
        assert_eq!(reps[2].macro_f1, 0.0);
    }

    #[test]
    fn text_and_json_render() {
        let r = macro_f1(Level::C, &map(&[Ind, Grp, Oth]), &map(&[Ind, Grp, Grp])).unwrap();
        let text = r.to_text();
        assert!(text.contains("macro-F1"));
        assert!(text.contains("OTH"));
        let json = serde_json::to_string(&r).unwrap();
        let back: EvalReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }

    fn ann(items: &[&[&str]]) -> AnnotationSet {
        AnnotationSet::new(
            items
                .iter()
                .enumerate()
                .map(|(i, ls)| (i.to_string(), ls.iter().map(|s| s.to_string()).collect()))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn agreement_examples() {
        assert_eq!(iaa_p0(&ann(&[&["x", "x"], &["y", "y"]])), 1.0);
        assert_eq!(iaa_p0(&ann(&[&["x", "x"], &["x", "y"]])), 0.75);
        assert!((iaa_p0(&ann(&[&["x", "x", "y"]])) - 2.0 / 3.0).abs() < 1e-12);
        let uneven = BTreeMap::from([("a".to_string(), vec!["x".to_string(), "x".to_string()]), ("b".to_string(), vec!["x".to_string()])]);
        assert!(AnnotationSet::new(uneven).is_err());
        assert!(AnnotationSet::new(BTreeMap::from([("a".to_string(), vec![])])).is_err());
        assert!(AnnotationSet::new(BTreeMap::from([("a".to_string(), vec!["x".to_string()])])).is_err());
    }

    #[test]
    fn histogram_examples() {
        let h = score_histogram([0.1, 0.1, 0.9], 2, 0.0, 1.0).unwrap();
        assert_eq!(h.counts, vec![2, 1]);
        let e = score_histogram([], 4, 0.0, 1.0).unwrap();
        assert_eq!(e.counts, vec![0; 4]);
        let edges = score_histogram([0.0, 1.0, -0.1, 1.1, f64::NAN], 2, 0.0, 1.0).unwrap();
        assert_eq!((edges.counts.clone(), edges.underflow, edges.overflow), (vec![1, 1], 1, 2));
        let mut csv = Vec::new();
        h.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "bin_lo,bin_hi,count\n0.000000,0.500000,2\n0.500000,1.000000,1\n");
        assert!(h.to_text(10).contains("##########"));
        assert!(Histogram::new(0, 0.0, 1.0).is_err());
        assert!(Histogram::new(3, 1.0, 1.0).is_err());
    }

    fn level_a() -> impl Strategy<Value = ClassLabel> {
        prop_oneof![Just(Off), Just(Not)]
    }

    proptest! {
        #[test]
        fn self_agreement_is_perfect(labels in proptest::collection::vec(level_a(), 1..50)) {
            let gold = map(&labels);
            prop_assert_eq!(macro_f1(Level::A, &gold, &gold).unwrap().macro_f1, 1.0);
        }

        #[test]
        fn class_renaming_does_not_change_the_score(pairs in proptest::collection::vec((level_a(), level_a()), 1..50)) {
            let swap = |l: ClassLabel| if l == Off { Not } else { Off };
            let gold = map(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
            let pred = map(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
            let gold2 = map(&pairs.iter().map(|p| swap(p.0)).collect::<Vec<_>>());
            let pred2 = map(&pairs.iter().map(|p| swap(p.1)).collect::<Vec<_>>());
            let a = macro_f1(Level::A, &gold, &pred).unwrap().macro_f1;
            let b = macro_f1(Level::A, &gold2, &pred2).unwrap().macro_f1;
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn agreement_is_bounded(items in proptest::collection::vec(proptest::collection::vec(0u8..3, 3), 1..20)) {
            let set = AnnotationSet::new(items.iter().enumerate().map(|(i, ls)| (i.to_string(), ls.iter().map(|l| l.to_string()).collect())).collect()).unwrap();
            let p = iaa_p0(&set);
            prop_assert!((1.0 / 3.0 - 1e-12..=1.0).contains(&p));
            let unanimous = items.iter().all(|ls| ls.iter().all(|l| *l == ls[0]));
            prop_assert_eq!(p == 1.0, unanimous);
        }

        #[test]
        fn histogram_conserves_counts(xs in proptest::collection::vec(-0.5f64..1.5, 0..200), bins in 1usize..20) {
            let h = score_histogram(xs.iter().copied(), bins, 0.0, 1.0).unwrap();
            prop_assert_eq!(h.total(), xs.len() as u64);
        }
    }
}
