//! Frequency-weighted stopword table driving the collection sampler.

use std::io::Read;

use crate::error::{Error, Result};

/// Top-20 Project Gutenberg words and their corpus frequencies.
const GUTENBERG_TOP20: [(&str, u64); 20] = [
    ("the", 56_271_872),
    ("of", 33_950_064),
    ("and", 29_944_184),
    ("to", 25_956_096),
    ("in", 17_420_636),
    ("i", 11_764_797),
    ("that", 11_073_318),
    ("was", 10_078_245),
    ("his", 8_799_755),
    ("he", 8_397_205),
    ("it", 8_058_110),
    ("with", 7_725_512),
    ("is", 7_557_477),
    ("for", 7_097_981),
    ("as", 7_037_543),
    ("had", 6_139_336),
    ("you", 6_048_903),
    ("not", 5_741_803),
    ("be", 5_662_527),
    ("her", 5_202_501),
];

#[derive(Debug, Clone, PartialEq)]
pub struct StopwordEntry {
    pub word: String,
    pub frequency: u64,
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StopwordTable {
    entries: Vec<StopwordEntry>,
}

impl StopwordTable {
    /// Builds a table from `(word, frequency)` pairs in sampling order.
    /// Cumulative values are normalized partial sums, so the last is 1.
    pub fn new<I, S>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let pairs: Vec<(String, u64)> = pairs.into_iter().map(|(w, f)| (w.into(), f)).collect();
        if pairs.is_empty() {
            return Err(Error::invalid("stopword table is empty"));
        }
        if let Some((w, _)) = pairs.iter().find(|(_, f)| *f == 0) {
            return Err(Error::invalid(format!("stopword `{w}` has zero frequency")));
        }
        let total: u64 = pairs.iter().map(|(_, f)| f).sum();
        let mut running = 0u64;
        let n = pairs.len();
        let entries = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (word, frequency))| {
                running += frequency;
                let cumulative = if i + 1 == n {
                    1.0
                } else {
                    running as f64 / total as f64
                };
                StopwordEntry {
                    word,
                    frequency,
                    cumulative,
                }
            })
            .collect();
        Ok(StopwordTable { entries })
    }

    pub fn gutenberg() -> Self {
        StopwordTable::new(GUTENBERG_TOP20).expect("built-in table is valid")
    }

    /// Reads `word,frequency` CSV; a `word,frequency` header line is optional.
    pub fn from_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut buf = String::new();
        input.read_to_string(&mut buf)?;
        let mut pairs = Vec::new();
        for (i, line) in buf.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line == "word,frequency") {
                continue;
            }
            let (word, freq) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(i + 1, "expected `word,frequency`"))?;
            let freq: u64 = freq
                .trim()
                .replace('_', "")
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad frequency `{freq}`")))?;
            pairs.push((word.trim().to_string(), freq));
        }
        StopwordTable::new(pairs)
    }

    pub fn entries(&self) -> &[StopwordEntry] {
        &self.entries
    }
}

/// Picks a stopword from a uniform variate `u` in `[0, 1]`.
///
/// Each cumulative value is the threshold at which its word starts being
/// chosen: the result is the last entry whose cumulative value is `<= u`,
/// and the first entry when `u` lies below every threshold.
pub fn sample_stopword(table: &StopwordTable, u: f64) -> Result<&str> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::invalid(format!("variate {u} outside [0, 1]")));
    }
    let idx = table
        .entries
        .partition_point(|e| e.cumulative <= u)
        .saturating_sub(1);
    Ok(&table.entries[idx].word)
}
