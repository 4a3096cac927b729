//! Single-file model persistence.
//!
//! Layout: 8-byte magic, `u32` format version, model kind and level strings,
//! a JSON config block (informational), then the model's binary tables.
//! All integers are little-endian; strings are `u32`-length-prefixed UTF-8.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::codec::{Reader, Writer};
use super::{LexiconModel, LinearModel, ModelKind, ModelPrediction, PmiModel, Scorer};
use crate::corpus::Instance;
use crate::error::{Error, Result};
use crate::label::Level;

pub const MAGIC: &[u8; 8] = b"CLBMODEL";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum NativeModel {
    Pmi(PmiModel),
    Linear(LinearModel),
    Lexicon(LexiconModel),
}

impl NativeModel {
    pub fn type_name(&self) -> &'static str {
        match self {
            NativeModel::Pmi(_) => "pmi",
            NativeModel::Linear(_) => "linear",
            NativeModel::Lexicon(_) => "lexicon",
        }
    }

    pub fn level(&self) -> Level {
        match self {
            NativeModel::Pmi(m) => m.level,
            NativeModel::Linear(m) => m.level,
            NativeModel::Lexicon(_) => Level::A,
        }
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        let name = name.into();
        match self {
            NativeModel::Pmi(m) => m.name = name,
            NativeModel::Linear(m) => m.name = name,
            NativeModel::Lexicon(m) => m.name = name,
        }
    }

    pub fn predict(&self, instance: &Instance) -> ModelPrediction {
        match self {
            NativeModel::Pmi(m) => m.predict(instance),
            NativeModel::Linear(m) => m.predict(instance),
            NativeModel::Lexicon(m) => m.predict(instance),
        }
    }

    fn config_json(&self) -> String {
        let value = match self {
            NativeModel::Pmi(m) => serde_json::to_value(&m.config),
            NativeModel::Linear(m) => serde_json::to_value(&m.config),
            NativeModel::Lexicon(m) => serde_json::to_value(m.words().collect::<Vec<_>>()),
        };
        value.expect("configs serialize").to_string()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::default();
        w.buf.extend_from_slice(MAGIC);
        w.u32(FORMAT_VERSION);
        w.str(self.type_name());
        w.str(self.level().as_str());
        w.str(&self.config_json());
        match self {
            NativeModel::Pmi(m) => m.encode(&mut w),
            NativeModel::Linear(m) => m.encode(&mut w),
            NativeModel::Lexicon(m) => m.encode(&mut w),
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(MAGIC.len()).ok() != Some(MAGIC.as_slice()) {
            return Err(Error::ModelFormat("not a model file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                found: version,
                expected: FORMAT_VERSION,
            });
        }
        let kind = r.str()?;
        let level: Level = r
            .str()?
            .parse()
            .map_err(|e: Error| Error::ModelFormat(e.to_string()))?;
        let config = r.str()?;
        serde_json::from_str::<serde_json::Value>(&config)
            .map_err(|e| Error::ModelFormat(format!("config block: {e}")))?;
        let model = match kind.as_str() {
            "pmi" => NativeModel::Pmi(PmiModel::decode(level, &mut r)?),
            "linear" => NativeModel::Linear(LinearModel::decode(level, &mut r)?),
            "lexicon" if level == Level::A => NativeModel::Lexicon(LexiconModel::decode(&mut r)?),
            other => return Err(Error::ModelFormat(format!("unknown model kind `{other}` at Level {level}"))),
        };
        r.finish()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        NativeModel::from_bytes(&fs::read(path)?)
    }

    /// Hex SHA-256 of the serialized model.
    pub fn content_hash(&self) -> String {
        hex_digest(&self.to_bytes())
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl Scorer for NativeModel {
    fn name(&self) -> &str {
        match self {
            NativeModel::Pmi(m) => &m.name,
            NativeModel::Linear(m) => &m.name,
            NativeModel::Lexicon(m) => &m.name,
        }
    }

    fn kind(&self) -> ModelKind {
        ModelKind::Discrete
    }

    fn levels(&self) -> Vec<Level> {
        vec![self.level()]
    }

    fn score(&self, level: Level, batch: &[Instance]) -> Result<Vec<ModelPrediction>> {
        match self {
            NativeModel::Pmi(m) => m.score(level, batch),
            NativeModel::Linear(m) => m.score(level, batch),
            NativeModel::Lexicon(m) => m.score(level, batch),
        }
    }
}
