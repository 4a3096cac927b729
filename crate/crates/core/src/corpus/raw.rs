//! Unlabeled corpus: newline-delimited JSON `{"id": ..., "text": ...}`.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawRecord {
    pub id: String,
    pub text: String,
}

/// One line of a raw corpus: either a record or the reason it was unreadable.
#[derive(Debug)]
pub enum RawLine {
    Record(RawRecord),
    Malformed { line: usize, message: String },
}

/// Streams a raw corpus. Blank lines are skipped; malformed lines are
/// reported but do not stop the stream. I/O failures do.
pub fn read_raw_jsonl<R: BufRead>(input: R) -> impl Iterator<Item = Result<RawLine>> {
    input.lines().enumerate().filter_map(|(i, line)| {
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(Error::Io(e))),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(Ok(match serde_json::from_str::<RawRecord>(&line) {
            Ok(rec) => RawLine::Record(rec),
            Err(e) => RawLine::Malformed {
                line: i + 1,
                message: e.to_string(),
            },
        }))
    })
}

pub fn write_raw_jsonl<'a, W: Write>(
    mut out: W,
    records: impl IntoIterator<Item = &'a RawRecord>,
) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r).map_err(|e| Error::invalid(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
