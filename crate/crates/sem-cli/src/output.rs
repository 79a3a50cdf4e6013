//! Tabular output: named sections rendered as CSV or JSON with identical
//! content.

use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Text(String),
    Int(i64),
    Real(f64),
    Bool(bool),
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Text(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::Int(v as i64)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

#[derive(Debug, Clone)]
pub struct Section {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Section {
    pub fn new(name: impl Into<String>, columns: Vec<String>) -> Self {
        Self { name: name.into(), columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, Default)]
pub struct Document {
    pub sections: Vec<Section>,
}

impl Document {
    pub fn push(&mut self, section: Section) {
        self.sections.push(section);
    }
}

/// Name matrix cells the way headers expect them: q_{i}{j}, 1-based.
pub fn cell_columns(k: usize) -> Vec<String> {
    let mut cols = Vec::with_capacity(k * k);
    for i in 1..=k {
        for j in 1..=k {
            cols.push(format!("q_{i}{j}"));
        }
    }
    cols
}

/// 17 significant digits: round-trips every f64.
fn real_to_string(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_field(v: &Value) -> String {
    match v {
        Value::Text(s) => s.clone(),
        Value::Int(i) => i.to_string(),
        Value::Real(r) => real_to_string(*r),
        Value::Bool(b) => b.to_string(),
    }
}

pub fn to_csv(doc: &Document) -> String {
    let mut out = String::new();
    for (idx, section) in doc.sections.iter().enumerate() {
        if idx > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# {}\n", section.name));
        out.push_str(&section.columns.join(","));
        out.push('\n');
        for row in &section.rows {
            let fields: Vec<String> = row.iter().map(csv_field).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
    }
    out
}

fn json_value(v: &Value) -> serde_json::Value {
    match v {
        Value::Text(s) => serde_json::Value::String(s.clone()),
        Value::Int(i) => serde_json::Value::from(*i),
        Value::Real(r) => serde_json::Value::from(*r),
        Value::Bool(b) => serde_json::Value::Bool(*b),
    }
}

pub fn to_json(doc: &Document) -> String {
    let mut root = serde_json::Map::new();
    for section in &doc.sections {
        let rows: Vec<serde_json::Value> = section
            .rows
            .iter()
            .map(|row| {
                let object: serde_json::Map<String, serde_json::Value> = section
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.clone(), json_value(v)))
                    .collect();
                serde_json::Value::Object(object)
            })
            .collect();
        root.insert(section.name.clone(), serde_json::Value::Array(rows));
    }
    serde_json::to_string_pretty(&serde_json::Value::Object(root)).expect("serializable")
        + "\n"
}

pub fn emit(
    doc: &Document,
    format: crate::config::OutputFormat,
    out: Option<&Path>,
) -> std::io::Result<()> {
    let rendered = match format {
        crate::config::OutputFormat::Csv => to_csv(doc),
        crate::config::OutputFormat::Json => to_json(doc),
    };
    match out {
        Some(path) => std::fs::write(path, rendered),
        None => std::io::stdout().write_all(rendered.as_bytes()),
    }
}
