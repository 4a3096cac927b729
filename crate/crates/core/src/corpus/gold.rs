//! Gold TSV in the OLID distribution layout.

use std::collections::HashSet;
use std::io::{Read, Write};

use super::{Instance, LabeledInstance};
use crate::error::{Error, Result};
use crate::label::{ClassLabel, HierLabel, Level};

pub const GOLD_HEADER: &str = "id\ttweet\tsubtask_a\tsubtask_b\tsubtask_c";

const NULL: &str = "NULL";

fn parse_cell(level: Level, cell: &str, row: usize) -> Result<Option<ClassLabel>> {
    if cell == NULL && level != Level::A {
        return Ok(None);
    }
    ClassLabel::parse_for(level, cell)
        .map(Some)
        .map_err(|e| Error::parse(row, e.to_string()))
}

/// Parses a gold TSV. Rows are numbered from 1 with the header as row 1.
pub fn parse_gold_tsv<R: Read>(mut input: R) -> Result<Vec<LabeledInstance>> {
    let mut buf = String::new();
    input
        .read_to_string(&mut buf)
        .map_err(|e| Error::parse(0, format!("unreadable input: {e}")))?;
    let mut lines = buf.lines();
    match lines.next() {
        Some(h) if h.trim_end_matches('\r') == GOLD_HEADER => {}
        Some(_) => return Err(Error::parse(1, "expected OLID header")),
        None => return Err(Error::parse(1, "missing header")),
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 2;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::parse(
                row,
                format!("expected 5 tab-separated columns, found {}", cols.len()),
            ));
        }
        let id = cols[0];
        if !seen.insert(id.to_string()) {
            return Err(Error::DuplicateId {
                id: id.to_string(),
                row,
            });
        }
        let a = parse_cell(Level::A, cols[2], row)?.expect("level A is never NULL");
        let b = parse_cell(Level::B, cols[3], row)?;
        let c = parse_cell(Level::C, cols[4], row)?;
        let label = HierLabel::new(a, b, c).map_err(|e| Error::parse(row, e.to_string()))?;
        out.push(LabeledInstance::new(Instance::new(id, cols[1]), label));
    }
    Ok(out)
}

/// Tabs and line breaks inside texts are written as spaces, which leaves
/// their tokenization unchanged.
pub fn write_gold_tsv<W: Write>(mut out: W, data: &[LabeledInstance]) -> Result<()> {
    writeln!(out, "{GOLD_HEADER}")?;
    for d in data {
        if d.instance.id.contains(['\t', '\n', '\r']) {
            return Err(Error::invalid(format!("id `{}` cannot be written to TSV", d.instance.id.escape_debug())));
        }
        let text = d.instance.text.replace(['\t', '\n', '\r'], " ");
        let cell = |c: Option<ClassLabel>| c.map_or(NULL, ClassLabel::as_str);
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            d.instance.id,
            text,
            d.label.a,
            cell(d.label.b),
            cell(d.label.c)
        )?;
    }
    Ok(())
}
