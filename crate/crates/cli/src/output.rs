//! CSV and JSON rendering.
//!
//! Floats are written with 17 significant digits so they read back exactly;
//! non-finite values become `null` in JSON and an empty cell in CSV.

use std::io::Write;
use std::path::Path;

use serde_json::{Map, Number, Value};

use crate::config::Format;
use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Int(u64),
    Text(String),
    Bool(bool),
    /// A two-element interval; CSV splits it into `<key>_low`, `<key>_high`.
    Interval(f64, f64),
}

/// One output row with keys in emission order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(&'static str, Field)>);

impl Record {
    pub fn num(mut self, key: &'static str, x: f64) -> Self {
        self.0.push((key, Field::Num(x)));
        self
    }

    pub fn int(mut self, key: &'static str, n: u64) -> Self {
        self.0.push((key, Field::Int(n)));
        self
    }

    pub fn text(mut self, key: &'static str, s: impl Into<String>) -> Self {
        self.0.push((key, Field::Text(s.into())));
        self
    }

    pub fn flag(mut self, key: &'static str, b: bool) -> Self {
        self.0.push((key, Field::Bool(b)));
        self
    }

    pub fn interval(mut self, key: &'static str, lo: f64, hi: f64) -> Self {
        self.0.push((key, Field::Interval(lo, hi)));
        self
    }

    fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (key, field) in &self.0 {
            let value = match field {
                Field::Num(x) => json_num(*x),
                Field::Int(n) => Value::from(*n),
                Field::Text(s) => Value::from(s.as_str()),
                Field::Bool(b) => Value::from(*b),
                Field::Interval(lo, hi) => Value::Array(vec![json_num(*lo), json_num(*hi)]),
            };
            map.insert((*key).to_string(), value);
        }
        Value::Object(map)
    }

    fn csv_header(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (key, field) in &self.0 {
            match field {
                Field::Interval(..) => {
                    out.push(format!("{key}_low"));
                    out.push(format!("{key}_high"));
                }
                _ => out.push((*key).to_string()),
            }
        }
        out
    }

    fn csv_cells(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (_, field) in &self.0 {
            match field {
                Field::Num(x) => out.push(csv_num(*x)),
                Field::Int(n) => out.push(n.to_string()),
                Field::Text(s) => out.push(s.clone()),
                Field::Bool(b) => out.push(b.to_string()),
                Field::Interval(lo, hi) => {
                    out.push(csv_num(*lo));
                    out.push(csv_num(*hi));
                }
            }
        }
        out
    }
}

/// 17 significant digits in scientific notation.
pub fn format_num(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_num(x: f64) -> Value {
    if x.is_finite() {
        // arbitrary_precision keeps the digits exactly as written
        Value::Number(format_num(x).parse::<Number>().expect("finite float renders as a JSON number"))
    } else {
        Value::Null
    }
}

fn csv_num(x: f64) -> String {
    if x.is_finite() {
        format_num(x)
    } else {
        String::new()
    }
}

/// Renders records. JSON gives a single object for one record and an array
/// otherwise; `always_array` forces the array.
pub fn render(records: &[Record], format: Format, always_array: bool) -> Result<String> {
    match format {
        Format::Json => {
            let value = if records.len() == 1 && !always_array {
                records[0].to_json()
            } else {
                Value::Array(records.iter().map(Record::to_json).collect())
            };
            let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Failed(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            if let Some(first) = records.first() {
                writer.write_record(first.csv_header()).map_err(csv_error)?;
            }
            for r in records {
                writer.write_record(r.csv_cells()).map_err(csv_error)?;
            }
            let bytes = writer.into_inner().map_err(|e| CliError::Failed(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Failed(e.to_string()))
        }
    }
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Failed(format!("csv: {e}"))
}

/// Writes to `path`, or to stdout when there is none.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}
