//! Rectangular numeric tables with a metadata block, written as CSV or JSON.
//!
//! CSV carries the metadata as leading `# key: value` lines. Numbers use the
//! shortest representation that parses back to the same `f64`, so reading a
//! table reproduces the matrix bit for bit. JSON stores `NaN` as `null`.

use crate::error::{CliError, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

/// Name of the column that marks rows with non-finite cells.
pub const POLE_COLUMN: &str = "pole";

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Metadata {
    pub preset: String,
    pub command: String,
    pub version: String,
    pub seed: Option<u64>,
    /// Conventions and assumptions in effect, e.g. `control = balanced`.
    pub flags: BTreeMap<String, String>,
}

impl Metadata {
    pub fn new(preset: &str, command: &str, seed: Option<u64>) -> Self {
        Self {
            preset: preset.into(),
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed,
            flags: BTreeMap::new(),
        }
    }

    pub fn flag(&mut self, key: &str, value: impl FlagValue) -> &mut Self {
        self.flags.insert(key.into(), value.render());
        self
    }
}

/// Values that can go into the metadata block.
pub trait FlagValue {
    fn render(&self) -> String;
}

impl FlagValue for f64 {
    fn render(&self) -> String {
        fmt_num(*self)
    }
}

impl FlagValue for &str {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl FlagValue for &String {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl FlagValue for bool {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl FlagValue for usize {
    fn render(&self) -> String {
        self.to_string()
    }
}

impl FlagValue for u64 {
    fn render(&self) -> String {
        self.to_string()
    }
}

/// Shortest text that parses back to the same `f64`; exponent form outside
/// `[1e-4, 1e16)`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e16).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub metadata: Metadata,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl OutputTable {
    pub fn new(columns: Vec<String>, metadata: Metadata) -> Self {
        Self { columns, rows: Vec::new(), metadata }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        self.rows.push(row);
    }

    /// Rectangular, and non-finite cells only in rows flagged by the pole column.
    pub fn check(&self) -> Result<()> {
        let n = self.columns.len();
        if let Some(k) = self.rows.iter().position(|r| r.len() != n) {
            return Err(CliError::Table(format!("row {k} has {} cells, expected {n}", self.rows[k].len())));
        }
        let pole = self.columns.iter().position(|c| c == POLE_COLUMN);
        for (k, r) in self.rows.iter().enumerate() {
            if r.iter().any(|v| !v.is_finite()) && pole.is_none_or(|p| r[p] != 1.0) {
                return Err(CliError::Table(format!("row {k} has non-finite cells without a pole flag")));
            }
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> Result<()> {
        self.check()?;
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => self.write_json(out),
        }
    }

    pub fn read(format: Format, input: &str) -> Result<Self> {
        match format {
            Format::Csv => Self::read_csv(input),
            Format::Json => Self::read_json(input),
        }
    }

    pub fn to_string(&self, format: Format) -> Result<String> {
        let mut buf = Vec::new();
        self.write(format, &mut buf)?;
        Ok(String::from_utf8(buf).expect("tables are utf-8"))
    }

    fn write_csv(&self, out: &mut dyn Write) -> Result<()> {
        let m = &self.metadata;
        writeln!(out, "# preset: {}", m.preset)?;
        writeln!(out, "# command: {}", m.command)?;
        writeln!(out, "# version: {}", m.version)?;
        match m.seed {
            Some(s) => writeln!(out, "# seed: {s}")?,
            None => writeln!(out, "# seed: none")?,
        }
        for (k, v) in &m.flags {
            writeln!(out, "# {k} = {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r.iter().map(|&v| fmt_num(v)))?;
        }
        w.flush()?;
        Ok(())
    }

    fn read_csv(input: &str) -> Result<Self> {
        let mut metadata = Metadata::default();
        for line in input.as_bytes().lines() {
            let line = line?;
            let Some(body) = line.strip_prefix("# ") else { break };
            if let Some((k, v)) = body.split_once(" = ") {
                metadata.flags.insert(k.into(), v.into());
            } else if let Some((k, v)) = body.split_once(": ") {
                match k {
                    "preset" => metadata.preset = v.into(),
                    "command" => metadata.command = v.into(),
                    "version" => metadata.version = v.into(),
                    "seed" => {
                        metadata.seed = match v {
                            "none" => None,
                            s => Some(s.parse().map_err(|_| CliError::Table(format!("bad seed `{s}`")))?),
                        }
                    }
                    _ => return Err(CliError::Table(format!("unknown metadata key `{k}`"))),
                }
            }
        }
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input.as_bytes());
        let columns = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|s| s.parse::<f64>().map_err(|_| CliError::Table(format!("bad number `{s}`"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        let t = Self { columns, rows, metadata };
        t.check()?;
        Ok(t)
    }

    fn write_json(&self, out: &mut dyn Write) -> Result<()> {
        let doc = JsonTable {
            metadata: self.metadata.clone(),
            columns: self.columns.clone(),
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&v| if v.is_nan() { None } else { Some(v) }).collect())
                .collect(),
        };
        serde_json::to_writer_pretty(&mut *out, &doc)?;
        writeln!(out)?;
        Ok(())
    }

    fn read_json(input: &str) -> Result<Self> {
        let doc: JsonTable = serde_json::from_str(input)?;
        let t = Self {
            columns: doc.columns,
            rows: doc.rows.into_iter().map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect()).collect(),
            metadata: doc.metadata,
        };
        t.check()?;
        Ok(t)
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTable {
    metadata: Metadata,
    columns: Vec<String>,
    rows: Vec<Vec<Option<f64>>>,
}

/// Bitwise equality of two numeric matrices (`NaN` equals `NaN`).
pub fn same_numbers(a: &OutputTable, b: &OutputTable) -> bool {
    a.columns == b.columns
        && a.rows.len() == b.rows.len()
        && a.rows.iter().zip(&b.rows).all(|(x, y)| {
            x.len() == y.len() && x.iter().zip(y).all(|(u, v)| u.to_bits() == v.to_bits() || u.is_nan() && v.is_nan())
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> OutputTable {
        let mut m = Metadata::new("canonical", "spectrum", Some(7));
        m.flag("control", "balanced").flag("phi", 0.0);
        let mut t = OutputTable::new(vec!["omega".into(), "S".into(), POLE_COLUMN.into()], m);
        t.push(vec![0.1, 1.0 / 3.0, 0.0]);
        t.push(vec![1.0, f64::NAN, 1.0]);
        t.push(vec![1e-300, 6.02214076e23, 0.0]);
        t
    }

    #[test]
    fn csv_round_trip() {
        let t = sample();
        let text = t.to_string(Format::Csv).unwrap();
        let back = OutputTable::read(Format::Csv, &text).unwrap();
        assert!(same_numbers(&t, &back));
        assert_eq!(back.metadata, t.metadata);
    }

    #[test]
    fn json_round_trip() {
        let t = sample();
        let text = t.to_string(Format::Json).unwrap();
        assert!(text.contains("null"));
        let back = OutputTable::read(Format::Json, &text).unwrap();
        assert!(same_numbers(&t, &back));
        assert_eq!(back.metadata, t.metadata);
    }

    #[test]
    fn number_text_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 1e-4, 9.99e-5, 2.39804971945384e-20, 1e16, 123456.789, -7e300, f64::MIN_POSITIVE] {
            let s = fmt_num(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt_num(2.5e-20), "2.5e-20");
        assert_eq!(fmt_num(0.25), "0.25");
    }

    #[test]
    fn unflagged_nan_rejected() {
        let mut t = OutputTable::new(vec!["omega".into()], Metadata::default());
        t.push(vec![f64::NAN]);
        assert!(t.check().is_err());
        let mut t = OutputTable::new(vec!["a".into(), "b".into()], Metadata::default());
        t.push(vec![1.0]);
        assert!(t.check().is_err());
    }
}
