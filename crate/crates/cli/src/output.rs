//! CSV and JSON writers. Floats are written with 17 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{Map, Value};

use crate::config::Formats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
}

impl Cell {
    fn text(self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Float(v) => fmt_f64(v),
        }
    }

    fn json(self) -> Value {
        match self {
            Cell::Int(v) => Value::from(v),
            Cell::Float(v) => Value::from(v),
        }
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header plus rows, with optional `#` comment lines above the CSV header.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
    pub comments: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            ..Self::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn comment(&mut self, line: String) {
        self.comments.push(line);
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        for c in &self.comments {
            writeln!(file, "# {c}")?;
        }
        let mut w = csv::Writer::from_writer(file);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.text()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(k, c)| (k.to_string(), c.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut out = Map::new();
        if !self.comments.is_empty() {
            out.insert("comments".into(), self.comments.clone().into());
        }
        out.insert("rows".into(), Value::Array(rows));
        Value::Object(out)
    }

    /// Writes `<stem>.csv` and/or `<stem>.json` under `dir`; returns the
    /// paths written.
    pub fn save(&self, dir: &Path, stem: &str, formats: Formats) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        if formats.csv {
            let p = dir.join(format!("{stem}.csv"));
            self.write_csv(&p)?;
            written.push(p);
        }
        if formats.json {
            let p = dir.join(format!("{stem}.json"));
            write_json(&p, &self.to_json())?;
            written.push(p);
        }
        Ok(written)
    }
}

pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut file, value)?;
    writeln!(file)?;
    file.flush()?;
    Ok(())
}
