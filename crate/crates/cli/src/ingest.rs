//! CSV ingestion with complete-case filtering.

use std::path::Path;

use funcavg_core::{Dataset, Error};

use crate::error::{CliError, CliResult};

/// Cells read as missing.
const MISSING: [&str; 4] = ["", "NA", "NaN", "."];

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    pub dataset: Dataset,
    /// Rows dropped for a missing value in a referenced column.
    pub dropped: usize,
}

/// Read `path`, keeping only `columns` (every column when empty). Rows with a
/// missing cell in a kept column are dropped.
pub fn ingest_csv(path: &Path, columns: &[&str]) -> CliResult<Ingested> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    ingest_reader(file, columns)
}

pub fn ingest_reader<R: std::io::Read>(input: R, columns: &[&str]) -> CliResult<Ingested> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| CliError::Data(format!("reading header: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.iter().all(String::is_empty) {
        return Err(CliError::Data("input has no header row".into()));
    }
    let wanted: Vec<&str> =
        if columns.is_empty() { header.iter().map(String::as_str).collect() } else { dedup(columns) };
    let mut positions = Vec::with_capacity(wanted.len());
    for name in &wanted {
        let j = header.iter().position(|h| h == name).ok_or_else(|| Error::UnknownColumn(name.to_string()))?;
        positions.push(j);
    }

    let mut data: Vec<Vec<f64>> = vec![Vec::new(); wanted.len()];
    let mut dropped = 0;
    let mut row = Vec::with_capacity(wanted.len());
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Data(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        row.clear();
        for (&j, name) in positions.iter().zip(&wanted) {
            let cell = record.get(j).unwrap_or("");
            if MISSING.contains(&cell) {
                break;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| CliError::Data(format!("line {line}, column `{name}`: `{cell}` is not a number")))?;
            row.push(v);
        }
        if row.len() < wanted.len() {
            dropped += 1;
            continue;
        }
        for (col, &v) in data.iter_mut().zip(&row) {
            col.push(v);
        }
    }
    if data.first().is_none_or(Vec::is_empty) {
        return Err(CliError::Data(format!("no complete rows in input ({dropped} dropped)")));
    }
    let dataset = Dataset::new(wanted.iter().map(|s| s.to_string()).collect(), data)?;
    Ok(Ingested { dataset, dropped })
}

fn dedup<'a>(columns: &[&'a str]) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::with_capacity(columns.len());
    for &c in columns {
        if !out.contains(&c) {
            out.push(c);
        }
    }
    out
}
