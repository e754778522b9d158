//! Loading value vectors from CSV or JSON files.
//!
//! CSV files carry a header `index,value` or `index,w`. A `w` column holds
//! knockoff statistics; a `value` column takes its kind from the caller and
//! defaults to p-values.
//! JSON files hold `{"kind": ..., "values": [...]}`.

use std::fs;
use std::path::Path;

use eclosure_core::{ValueKind, ValueVector};

use crate::error::{CliError, Result};

/// Reads `path`, dispatching on the `.json` extension or a leading `{`.
pub fn load(path: &Path, kind: Option<ValueKind>) -> Result<ValueVector> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
    let json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('{');
    if json {
        parse_json(&text, kind)
    } else {
        parse_csv(&text, kind)
    }
}

pub fn parse_json(text: &str, kind: Option<ValueKind>) -> Result<ValueVector> {
    let v: ValueVector = serde_json::from_str(text)?;
    if let Some(k) = kind {
        v.expect(k)?;
    }
    Ok(v)
}

fn in_range(kind: ValueKind, x: f64) -> bool {
    match kind {
        ValueKind::Pvalue => (0.0..=1.0).contains(&x),
        ValueKind::Evalue => x >= 0.0,
        ValueKind::KnockoffStat => x.is_finite(),
    }
}

pub fn parse_csv(text: &str, kind: Option<ValueKind>) -> Result<ValueVector> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    let cols: Vec<String> = header.iter().map(str::to_ascii_lowercase).collect();
    if cols.len() != 2 || cols[0] != "index" || !(cols[1] == "value" || cols[1] == "w") {
        return Err(CliError::parse(1, format!("expected header 'index,value' or 'index,w', found '{}'", cols.join(","))));
    }
    let kind = match (cols[1].as_str(), kind) {
        ("w", None | Some(ValueKind::KnockoffStat)) => ValueKind::KnockoffStat,
        ("w", Some(k)) => return Err(CliError::parse(1, format!("column 'w' holds knockoff statistics but {k} values are needed"))),
        (_, Some(k)) => k,
        (_, None) => ValueKind::Pvalue,
    };

    let mut slots: Vec<Option<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if rec.len() != 2 {
            return Err(CliError::parse(line, format!("expected 2 fields, found {}", rec.len())));
        }
        let index: usize = rec[0].parse().map_err(|_| CliError::parse(line, format!("bad index '{}'", &rec[0])))?;
        if index == 0 {
            return Err(CliError::parse(line, "indices start at 1"));
        }
        let x: f64 = rec[1].parse().map_err(|_| CliError::parse(line, format!("bad number '{}'", &rec[1])))?;
        if x.is_nan() || !in_range(kind, x) {
            return Err(CliError::parse(line, format!("{} out of range for {kind}", &rec[1])));
        }
        if slots.len() < index {
            slots.resize(index, None);
        }
        if slots[index - 1].replace(x).is_some() {
            return Err(CliError::parse(line, format!("duplicate index {index}")));
        }
    }
    if slots.is_empty() {
        return Err(CliError::Input("empty dataset: no data rows".into()));
    }
    let values = slots
        .iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| CliError::Input(format!("indices must be contiguous from 1; {} is missing", i + 1))))
        .collect::<Result<Vec<f64>>>()?;
    Ok(ValueVector::new(kind, values)?)
}

/// Writes `v` in the `index,value` (or `index,w`) layout.
pub fn to_csv(v: &ValueVector) -> String {
    let col = if v.kind() == ValueKind::KnockoffStat { "w" } else { "value" };
    let mut out = format!("index,{col}\n");
    for (i, x) in v.values().iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, x));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_values_and_errors() {
        let v = parse_csv("index,value\n2,0.5\n1,0.01\n", Some(ValueKind::Pvalue)).unwrap();
        assert_eq!(v.values(), &[0.01, 0.5]);
        let w = parse_csv("index,w\n1,-2\n2,3.5\n", None).unwrap();
        assert_eq!(w.kind(), ValueKind::KnockoffStat);

        let err = parse_csv("index,value\n1,0.1\n2,1.5\n", Some(ValueKind::Pvalue)).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err}");
        let err = parse_csv("index,value\n1,0.1\n1,0.2\n", Some(ValueKind::Pvalue)).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }));
        let err = parse_csv("index,value\n1,abc\n", Some(ValueKind::Pvalue)).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }));
        assert!(parse_csv("index,value\n1,0.1\n3,0.2\n", Some(ValueKind::Pvalue)).is_err());
        assert!(parse_csv("index,value\n", Some(ValueKind::Pvalue)).is_err());
        assert!(parse_csv("index,w\n1,2\n", Some(ValueKind::Evalue)).is_err());
        assert!(parse_csv("i,p\n1,0.2\n", Some(ValueKind::Pvalue)).is_err());
    }

    #[test]
    fn json_and_csv_round_trip() {
        let v = parse_json(r#"{"kind": "evalue", "values": [1.5, "inf", "0.25"]}"#, None).unwrap();
        assert_eq!(v.values(), &[1.5, f64::INFINITY, 0.25]);
        assert!(parse_json(r#"{"kind": "evalue", "values": [1]}"#, Some(ValueKind::Pvalue)).is_err());
        let back = parse_csv(&to_csv(&v), Some(ValueKind::Evalue)).unwrap();
        assert_eq!(back, v);
    }
}
