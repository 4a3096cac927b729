//! Distant score files (one CSV per level) and the Level A per-model
//! prediction file consumed by easy/hard partitioning.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use super::{AggregateScore, DistantRecord};
use crate::error::{Error, Result};
use crate::label::{ClassLabel, Level};
use crate::models::{ModelKind, ModelPrediction};

pub const LEVEL_A_HEADER: &str = "id,average,std";
pub const LEVEL_B_HEADER: &str = "id,average,std";
pub const LEVEL_C_HEADER: &str = "id,avg_ind,std_ind,avg_grp,std_grp,avg_oth,std_oth";
pub const PREDICTIONS_A_HEADER: &str = "id,model,kind,confidence_off,hard_label";

fn check_id(id: &str) -> Result<()> {
    if id.contains([',', '\n', '\r', '"']) {
        return Err(Error::invalid(format!("id `{id}` cannot be written to CSV")));
    }
    Ok(())
}

/// Writes the three per-level score files. Records must be id-sorted.
pub fn write_distant<A: Write, B: Write, C: Write>(
    records: &[DistantRecord],
    mut a: A,
    mut b: B,
    mut c: C,
) -> Result<()> {
    writeln!(a, "{LEVEL_A_HEADER}")?;
    writeln!(b, "{LEVEL_B_HEADER}")?;
    writeln!(c, "{LEVEL_C_HEADER}")?;
    for r in records {
        check_id(&r.id)?;
        writeln!(a, "{},{:.6},{:.6}", r.id, r.level_a.average, r.level_a.std)?;
        if let Some(s) = &r.level_b {
            writeln!(b, "{},{:.6},{:.6}", r.id, s.average, s.std)?;
        }
        if let Some([ind, grp, oth]) = &r.level_c {
            writeln!(
                c,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                r.id, ind.average, ind.std, grp.average, grp.std, oth.average, oth.std
            )?;
        }
    }
    Ok(())
}

fn read_rows<R: BufRead>(input: R, header: &str, width: usize) -> Result<Vec<(String, Vec<f64>)>> {
    let mut rows = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let row = i + 1;
        if i == 0 {
            if line.trim_end() != header {
                return Err(Error::parse(row, format!("expected header `{header}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != width + 1 {
            return Err(Error::parse(row, format!("expected {} columns", width + 1)));
        }
        let values = cols[1..]
            .iter()
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| (0.0..=1.0).contains(x))
                    .ok_or_else(|| Error::parse(row, format!("bad score `{v}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((cols[0].to_string(), values));
    }
    Ok(rows)
}

fn score(average: f64, std: f64) -> AggregateScore {
    AggregateScore {
        average,
        std,
        per_model: Vec::new(),
    }
}

/// Reads score files back into records (without per-model detail). Level B
/// and C rows must refer to ids present at the level above.
pub fn read_distant<A: BufRead, B: BufRead, C: BufRead>(
    a: A,
    b: Option<B>,
    c: Option<C>,
) -> Result<Vec<DistantRecord>> {
    let mut records: BTreeMap<String, DistantRecord> = BTreeMap::new();
    for (row, (id, v)) in read_rows(a, LEVEL_A_HEADER, 2)?.into_iter().enumerate() {
        if records.contains_key(&id) {
            return Err(Error::DuplicateId { id, row: row + 2 });
        }
        records.insert(
            id.clone(),
            DistantRecord {
                id,
                level_a: score(v[0], v[1]),
                level_b: None,
                level_c: None,
            },
        );
    }
    if let Some(b) = b {
        for (row, (id, v)) in read_rows(b, LEVEL_B_HEADER, 2)?.into_iter().enumerate() {
            let r = records
                .get_mut(&id)
                .ok_or_else(|| Error::parse(row + 2, format!("Level B id `{id}` has no Level A row")))?;
            r.level_b = Some(score(v[0], v[1]));
        }
    }
    if let Some(c) = c {
        for (row, (id, v)) in read_rows(c, LEVEL_C_HEADER, 6)?.into_iter().enumerate() {
            let r = records
                .get_mut(&id)
                .filter(|r| r.level_b.is_some())
                .ok_or_else(|| Error::parse(row + 2, format!("Level C id `{id}` has no Level B row")))?;
            r.level_c = Some([score(v[0], v[1]), score(v[2], v[3]), score(v[4], v[5])]);
        }
    }
    Ok(records.into_values().collect())
}

/// One row per (instance, Level A model), in ensemble order.
pub fn write_predictions_a<W: Write>(
    ids: &[&str],
    preds: &[Vec<ModelPrediction>],
    mut out: W,
) -> Result<()> {
    writeln!(out, "{PREDICTIONS_A_HEADER}")?;
    for (id, row) in ids.iter().zip(preds) {
        check_id(id)?;
        for p in row {
            check_id(&p.model_name)?;
            writeln!(
                out,
                "{},{},{},{:.6},{}",
                id,
                p.model_name,
                p.kind.as_str(),
                p.confidence(ClassLabel::Off),
                p.hard_label
            )?;
        }
    }
    Ok(())
}

/// Groups prediction rows by id, keeping model order within each id.
pub fn read_predictions_a<R: BufRead>(input: R) -> Result<BTreeMap<String, Vec<ModelPrediction>>> {
    let mut out: BTreeMap<String, Vec<ModelPrediction>> = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let row = i + 1;
        if i == 0 {
            if line.trim_end() != PREDICTIONS_A_HEADER {
                return Err(Error::parse(row, format!("expected header `{PREDICTIONS_A_HEADER}`")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::parse(row, "expected 5 columns"));
        }
        let kind: ModelKind = cols[2].parse().map_err(|e: Error| Error::parse(row, e.to_string()))?;
        let off: f64 = cols[3]
            .parse()
            .ok()
            .filter(|x| (0.0..=1.0).contains(x))
            .ok_or_else(|| Error::parse(row, format!("bad confidence `{}`", cols[3])))?;
        let hard_label =
            ClassLabel::parse_for(Level::A, cols[4]).map_err(|e| Error::parse(row, e.to_string()))?;
        out.entry(cols[0].to_string()).or_default().push(ModelPrediction {
            model_name: cols[1].to_string(),
            kind,
            level: Level::A,
            confidences: vec![off, 1.0 - off],
            hard_label,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(a: f64, d: f64) -> AggregateScore {
        score(a, d)
    }

    #[test]
    fn files_round_trip_at_six_decimals() {
        let records = vec![
            DistantRecord { id: "1".into(), level_a: s(0.1234564, 0.2), level_b: None, level_c: None },
            DistantRecord {
                id: "2".into(),
                level_a: s(0.9, 0.05),
                level_b: Some(s(0.2, 0.1)),
                level_c: Some([s(0.7, 0.1), s(0.2, 0.1), s(0.1, 0.05)]),
            },
        ];
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        write_distant(&records, &mut a, &mut b, &mut c).unwrap();
        let a_txt = String::from_utf8(a.clone()).unwrap();
        assert_eq!(a_txt, "id,average,std\n1,0.123456,0.200000\n2,0.900000,0.050000\n");
        assert_eq!(
            String::from_utf8(c.clone()).unwrap(),
            "id,avg_ind,std_ind,avg_grp,std_grp,avg_oth,std_oth\n2,0.700000,0.100000,0.200000,0.100000,0.100000,0.050000\n"
        );
        let back = read_distant(a.as_slice(), Some(b.as_slice()), Some(c.as_slice())).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].level_a.average, 0.123456);
        assert!(back[1].level_c.is_some());
        assert!(back[0].level_b.is_none());
    }

    #[test]
    fn orphan_rows_are_rejected() {
        let a = "id,average,std\n1,0.5,0.1\n";
        let b = "id,average,std\n2,0.5,0.1\n";
        assert!(read_distant(a.as_bytes(), Some(b.as_bytes()), None::<&[u8]>).is_err());
        let bad = "id,average,std\n1,1.5,0.1\n";
        assert!(read_distant(bad.as_bytes(), None::<&[u8]>, None::<&[u8]>).is_err());
    }

    #[test]
    fn predictions_round_trip() {
        let preds = vec![vec![
            ModelPrediction::from_confidences("bert", ModelKind::Continuous, Level::A, vec![0.9, 0.1]),
            ModelPrediction::from_confidences("pmi", ModelKind::Discrete, Level::A, vec![0.4, 0.6]),
        ]];
        let mut buf = Vec::new();
        write_predictions_a(&["x"], &preds, &mut buf).unwrap();
        let back = read_predictions_a(buf.as_slice()).unwrap();
        assert_eq!(back["x"].len(), 2);
        assert_eq!(back["x"][1].hard_label, ClassLabel::Not);
        assert_eq!(back["x"][0].kind, ModelKind::Continuous);
    }
}
