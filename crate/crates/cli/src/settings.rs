//! Key/value run configuration. Precedence: command line > config file >
//! built-in default.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use colabel::cotrain::{DistillThresholds, GateConfig};
use colabel::models::{LinearConfig, PmiConfig};
use colabel::select::{BucketThresholds, Condition, SelectionPolicy, Side};
use colabel::{ClassLabel, Level};

use crate::CliError;

/// Known keys and their defaults. `None` means "derived from the level".
const KNOWN: &[(&str, Option<&str>)] = &[
    ("seed", Some("13241")),
    ("threads", Some("1")),
    ("level", None),
    ("batch_size", Some("256")),
    ("scorer.timeout_secs", Some("60")),
    ("pmi.min_count", Some("5")),
    ("pmi.smoothing", Some("0.01")),
    ("pmi.orders", Some("1,2")),
    ("pmi.temperature", Some("10")),
    ("linear.ngram_order", None),
    ("linear.learning_rate", None),
    ("linear.dim", Some("32")),
    ("linear.epochs", Some("25")),
    ("linear.buckets", Some("2097152")),
    ("train.upsample", Some("false")),
    ("train.class_weights", Some("false")),
    ("train.curriculum", None),
    ("gate.b_min_confidence", Some("0.5")),
    ("gate.c_max_unt", Some("0.5")),
    ("gate.c_max_std", Some("0.25")),
    ("select.a_below", Some("0.2")),
    ("select.a_above", Some("0.7")),
    ("select.b_below", Some("0.3")),
    ("select.b_above", Some("0.7")),
    ("select.c_ind_above", Some("0.8")),
    ("select.c_grp_above", Some("0.7")),
    ("select.c_oth_above", Some("0.65")),
    ("bucket.easy_off", Some("0.8")),
    ("bucket.hard_off", Some("0.5")),
    ("bucket.hard_not", Some("0.5")),
    ("bucket.easy_not_first", Some("0.2")),
    ("bucket.easy_not_rest", Some("0.8")),
    ("distill.off", Some("0.5")),
    ("distill.unt", Some("0.5")),
];

#[derive(Debug, Clone)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn check_key(key: &str) -> Result<(), CliError> {
    if KNOWN.iter().any(|(k, _)| *k == key) {
        Ok(())
    } else {
        Err(CliError::Usage(format!("unknown configuration key `{key}`")))
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let k = k.trim();
        check_key(k).map_err(|e| CliError::Usage(format!("config line {}: {e}", i + 1)))?;
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn load(config: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, String> = KNOWN
            .iter()
            .filter_map(|(k, v)| v.map(|v| (k.to_string(), v.to_string())))
            .collect();
        if let Some(path) = config {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            values.extend(parse_config(&text)?);
        }
        let mut settings = Settings { values };
        settings.apply(overrides)?;
        Ok(settings)
    }

    pub fn apply(&mut self, overrides: &[(String, String)]) -> Result<(), CliError> {
        for (k, v) in overrides {
            check_key(k)?;
            self.values.insert(k.clone(), v.clone());
        }
        Ok(())
    }

    pub fn snapshot(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        debug_assert!(KNOWN.iter().any(|(k, _)| *k == key), "{key}");
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Usage(format!("bad value `{v}` for `{key}`"))),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        self.opt(key)?
            .ok_or_else(|| CliError::Usage(format!("`{key}` is not set (use --{} or the config file)", key.replace('_', "-"))))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.get("seed")
    }

    pub fn level(&self) -> Result<Level, CliError> {
        self.get("level")
    }

    pub fn pmi(&self) -> Result<PmiConfig, CliError> {
        let orders = self
            .get::<String>("pmi.orders")?
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| CliError::Usage("pmi.orders must be a comma-separated list of integers".into()))?;
        Ok(PmiConfig {
            min_count: self.get("pmi.min_count")?,
            smoothing: self.get("pmi.smoothing")?,
            orders,
            temperature: self.get("pmi.temperature")?,
        })
    }

    pub fn linear(&self, level: Level) -> Result<LinearConfig, CliError> {
        let base = LinearConfig::for_level(level);
        Ok(LinearConfig {
            ngram_order: self.opt("linear.ngram_order")?.unwrap_or(base.ngram_order),
            learning_rate: self.opt("linear.learning_rate")?.unwrap_or(base.learning_rate),
            dim: self.get("linear.dim")?,
            epochs: self.get("linear.epochs")?,
            buckets: self.get("linear.buckets")?,
            seed: self.seed()?,
            class_weights: None,
        })
    }

    pub fn gates(&self) -> Result<GateConfig, CliError> {
        Ok(GateConfig {
            b_min_confidence: self.get("gate.b_min_confidence")?,
            c_max_unt: self.get("gate.c_max_unt")?,
            c_max_std: self.get("gate.c_max_std")?,
        })
    }

    pub fn selection(&self, level: Level) -> Result<SelectionPolicy, CliError> {
        let c = |class, side, key: &str| -> Result<Condition, CliError> {
            Ok(Condition { class, side, threshold: self.get(key)? })
        };
        use ClassLabel::*;
        use Side::*;
        let any_of = match level {
            Level::A => vec![c(Off, Below, "select.a_below")?, c(Off, Above, "select.a_above")?],
            Level::B => vec![c(Unt, Below, "select.b_below")?, c(Unt, Above, "select.b_above")?],
            Level::C => vec![
                c(Ind, Above, "select.c_ind_above")?,
                c(Grp, Above, "select.c_grp_above")?,
                c(Oth, Above, "select.c_oth_above")?,
            ],
        };
        Ok(SelectionPolicy::new(level, any_of)?)
    }

    pub fn buckets(&self) -> Result<BucketThresholds, CliError> {
        Ok(BucketThresholds {
            easy_off: self.get("bucket.easy_off")?,
            hard_off: self.get("bucket.hard_off")?,
            hard_not: self.get("bucket.hard_not")?,
            easy_not_first: self.get("bucket.easy_not_first")?,
            easy_not_rest: self.get("bucket.easy_not_rest")?,
        })
    }

    pub fn distill(&self) -> Result<DistillThresholds, CliError> {
        Ok(DistillThresholds { off: self.get("distill.off")?, unt: self.get("distill.unt")? })
    }
}
