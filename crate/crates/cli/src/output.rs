//! Row-oriented CSV and JSON-lines emitters.
//!
//! Reals are written with 17 significant digits, so they parse back to the
//! same `f64`. Non-finite reals and absent values become empty CSV fields and
//! JSON `null`.

use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    Text(String),
    Missing,
}

impl From<u64> for Value {
    fn from(v: u64) -> Self {
        Value::Int(v as i64)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Real(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Text(v.to_string())
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Missing, Into::into)
    }
}

impl Value {
    fn csv_field(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Real(v) if v.is_finite() => format!("{v:.16e}"),
            Value::Real(_) | Value::Missing => String::new(),
            Value::Bool(b) => b.to_string(),
            Value::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Value::Int(v) => (*v).into(),
            Value::Real(v) => serde_json::Number::from_f64(*v).map_or(serde_json::Value::Null, Into::into),
            Value::Bool(b) => (*b).into(),
            Value::Text(s) => s.clone().into(),
            Value::Missing => serde_json::Value::Null,
        }
    }
}

/// Ordered `(column, value)` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Row(pub Vec<(&'static str, Value)>);

impl Row {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &'static str, v: impl Into<Value>) -> Self {
        self.0.push((key, v.into()));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Writes rows sharing one header (taken from the first row).
pub fn write_rows<W: Write>(out: W, format: Format, rows: &[Row]) -> io::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            if let Some(first) = rows.first() {
                w.write_record(first.0.iter().map(|(k, _)| *k))?;
            }
            for row in rows {
                w.write_record(row.0.iter().map(|(_, v)| v.csv_field()))?;
            }
            w.flush()
        }
        Format::Json => {
            let mut out = out;
            for row in rows {
                let mut line = String::from("{");
                for (i, (k, v)) in row.0.iter().enumerate() {
                    if i > 0 {
                        line.push(',');
                    }
                    line.push_str(&serde_json::to_string(k).map_err(io::Error::other)?);
                    line.push(':');
                    line.push_str(&serde_json::to_string(&v.json()).map_err(io::Error::other)?);
                }
                line.push_str("}\n");
                out.write_all(line.as_bytes())?;
            }
            out.flush()
        }
    }
}
