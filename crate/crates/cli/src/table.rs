// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Tidy tables rendered as CSV or NDJSON.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Ndjson,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Ndjson => "ndjson",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::I(x as i64)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::I(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::F)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Same table with `name = value` prepended to every row.
    pub fn keyed(&self, name: &str, value: Cell) -> Table {
        let mut header = vec![name.to_string()];
        header.extend(self.header.iter().cloned());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![value.clone()];
                row.extend(r.iter().cloned());
                row
            })
            .collect();
        Table { header, rows }
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        let mut out = String::new();
        match format {
            Format::Csv => {
                out.push_str(&self.header.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(csv_cell).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
            }
            Format::Ndjson => {
                for row in &self.rows {
                    let mut obj = serde_json::Map::new();
                    for (k, c) in self.header.iter().zip(row) {
                        obj.insert(k.clone(), json_cell(c));
                    }
                    out.push_str(&serde_json::Value::Object(obj).to_string());
                    out.push('\n');
                }
            }
        }
        out.into_bytes()
    }
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::F(x) => format_f64(*x),
        Cell::I(x) => x.to_string(),
        Cell::S(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Cell::S(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

fn json_cell(c: &Cell) -> serde_json::Value {
    match c {
        Cell::F(x) if x.is_finite() => serde_json::Value::from(*x),
        Cell::F(x) => serde_json::Value::from(format_f64(*x)),
        Cell::I(x) => serde_json::Value::from(*x),
        Cell::S(s) => serde_json::Value::from(s.as_str()),
        Cell::Empty => serde_json::Value::Null,
    }
}

/// Shortest round-trip representation, in exponent form outside [1e-4, 1e15).
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
