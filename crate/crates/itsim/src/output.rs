//! CSV and JSON emission with finiteness enforcement.
//!
//! Numbers are written with 17 significant digits and a '.' decimal
//! separator regardless of locale. Any NaN or infinity aborts the write
//! before touching disk.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Formats one value at full round-trip precision.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table: fixed header, rows of equal width, all values finite.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(Error::Domain(format!(
                "row width {} does not match header width {}",
                row.len(),
                self.header.len()
            )));
        }
        for (col, &x) in row.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFinite(format!(
                    "column {} row {}",
                    self.header[col],
                    self.rows.len()
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn to_string(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_value(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_string().as_bytes())?;
        Ok(())
    }
}

/// Parses a two-column CSV (with header) of time/population samples.
pub fn read_two_column_csv(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue; // header
        }
        let mut cols = line.split(',');
        let parse = |field: Option<&str>| -> Result<f64> {
            field
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::Domain(format!("bad CSV row {}: {line:?}", i + 1)))
        };
        rows.push((parse(cols.next())?, parse(cols.next())?));
    }
    if rows.is_empty() {
        return Err(Error::Domain("CSV contains no data rows".into()));
    }
    Ok(rows)
}

/// Serializes a JSON value to pretty text and writes it.
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON value serializes");
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}
