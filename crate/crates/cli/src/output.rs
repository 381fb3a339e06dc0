//! Column tables written as CSV or JSON.

use serde_json::{json, Value};
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone)]
pub enum Column {
    Num(Vec<f64>),
    Text(Vec<String>),
    Bool(Vec<bool>),
}

impl Column {
    fn len(&self) -> usize {
        match self {
            Column::Num(v) => v.len(),
            Column::Text(v) => v.len(),
            Column::Bool(v) => v.len(),
        }
    }

    fn cell(&self, i: usize) -> String {
        match self {
            Column::Num(v) => fmt_num(v[i]),
            Column::Text(v) => v[i].clone(),
            Column::Bool(v) => v[i].to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            // non-finite values become null
            Column::Num(v) => Value::Array(
                v.iter()
                    .map(|&x| if x.is_finite() { json!(x) } else { Value::Null })
                    .collect(),
            ),
            Column::Text(v) => json!(v),
            Column::Bool(v) => json!(v),
        }
    }
}

/// 17 significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "NaN".into()
    }
}

#[derive(Debug, Clone)]
pub struct Table {
    pub metadata: Value,
    pub columns: Vec<(String, Column)>,
}

impl Table {
    pub fn new(metadata: Value) -> Self {
        Self {
            metadata,
            columns: Vec::new(),
        }
    }

    pub fn push(&mut self, name: &str, col: Column) {
        self.columns.push((name.to_string(), col));
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.1.len())
    }

    pub fn render(&self, format: Format) -> Vec<u8> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(self.columns.iter().map(|c| c.0.as_str()))
                    .expect("write to memory");
                for i in 0..self.rows() {
                    w.write_record(self.columns.iter().map(|c| c.1.cell(i)))
                        .expect("write to memory");
                }
                w.into_inner().expect("flush to memory")
            }
            Format::Json => {
                let cols: Vec<Value> = self
                    .columns
                    .iter()
                    .map(|(n, c)| json!({"name": n, "values": c.json()}))
                    .collect();
                let mut v =
                    serde_json::to_vec_pretty(&json!({"metadata": self.metadata, "columns": cols}))
                        .expect("serialize");
                v.push(b'\n');
                v
            }
        }
    }

    /// Writes to `path`, or stdout when `path` is None.
    pub fn write(&self, format: Format, path: Option<&Path>) -> std::io::Result<()> {
        let bytes = self.render(format);
        match path {
            Some(p) => std::fs::write(p, bytes),
            None => std::io::stdout().lock().write_all(&bytes),
        }
    }
}
