//! Tabular output with an embedded run manifest.
//!
//! CSV output starts with one `# {manifest}` line; JSON output is an object
//! `{"manifest": ..., "records": [...]}`. The checksum covers the body only
//! (CSV rows after the header comment, or the serialized records array).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use clap::ValueEnum;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Missing,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format_number(*v),
            Cell::Missing => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(i) => Value::from(*i),
            Cell::Num(v) => serde_json::Number::from_f64(*v).map_or(Value::Null, Value::Number),
            Cell::Missing => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Missing, Cell::Num)
    }
}

/// Shortest round-trip representation; exponent form outside `[1e-4, 1e15)`.
pub fn format_number(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Rounds to `digits` significant digits.
pub fn round_significant(v: f64, digits: usize) -> f64 {
    format!("{:.*e}", digits.saturating_sub(1), v).parse().unwrap_or(v)
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn csv_body(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    fn records(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut m = Map::new();
                    for (c, v) in self.columns.iter().zip(row) {
                        m.insert(c.clone(), v.json());
                    }
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub parameters: BTreeMap<String, Value>,
    pub seed: Option<u64>,
    pub output_path: String,
    pub artifact_checksum: String,
}

impl Manifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        Self {
            command: command.into(),
            parameters: BTreeMap::new(),
            seed,
            output_path: String::new(),
            artifact_checksum: String::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters
            .insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }
}

/// Where output goes; `None` is stdout.
#[derive(Debug, Clone)]
pub struct Sink(pub Option<PathBuf>);

impl Sink {
    fn label(&self) -> String {
        self.0.as_ref().map_or_else(|| "-".into(), |p| p.display().to_string())
    }

    fn write(&self, text: &str) -> anyhow::Result<()> {
        match &self.0 {
            Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
                Ok(())
            }
        }
    }
}

fn checksum(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

fn stamp(manifest: &mut Manifest, sink: &Sink, body: &str) {
    manifest.output_path = sink.label();
    manifest.artifact_checksum = checksum(body);
}

fn header_line(manifest: &Manifest) -> anyhow::Result<String> {
    Ok(format!("# {}\n", serde_json::to_string(manifest)?))
}

pub fn emit_table(table: &Table, mut manifest: Manifest, format: Format, sink: &Sink) -> anyhow::Result<()> {
    manifest.param("format", format!("{format:?}").to_lowercase());
    match format {
        Format::Csv => {
            let body = table.csv_body();
            stamp(&mut manifest, sink, &body);
            sink.write(&(header_line(&manifest)? + &body))
        }
        Format::Json => {
            let records = table.records();
            let body = serde_json::to_string(&records)?;
            stamp(&mut manifest, sink, &body);
            let doc = serde_json::json!({ "manifest": manifest, "records": records });
            sink.write(&(serde_json::to_string_pretty(&doc)? + "\n"))
        }
    }
}

/// Free-form text with the manifest as a leading comment line.
pub fn emit_text(text: &str, mut manifest: Manifest, sink: &Sink) -> anyhow::Result<()> {
    stamp(&mut manifest, sink, text);
    sink.write(&(header_line(&manifest)? + text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting_round_trips() {
        for v in [0.0, 1.0, -0.13333333333333333, 2.6936e-3, -7.0724e-7, 1e20, 123.456] {
            assert_eq!(format_number(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_number(0.8), "0.8");
        assert_eq!(format_number(-7.0724e-7), "-7.0724e-7");
    }

    #[test]
    fn significant_rounding() {
        assert_eq!(round_significant(-0.133333, 4), -0.1333);
        assert_eq!(round_significant(2.6936e-3, 4), 2.694e-3);
        assert_eq!(round_significant(-7.07243e-7, 5), -7.0724e-7);
    }

    #[test]
    fn csv_body_and_records() {
        let mut t = Table::new(&["q", "a"]);
        t.push(vec![Cell::from(0usize), Cell::from(1.0)]);
        t.push(vec![Cell::from(1usize), Cell::Missing]);
        assert_eq!(t.csv_body(), "q,a\n0,1\n1,\n");
        assert_eq!(t.records()[1]["a"], Value::Null);
    }
}
