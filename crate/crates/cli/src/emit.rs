//! Output emission: JSON with sorted keys, CSV with a fixed column order, and
//! every float rounded to 12 significant digits in both.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use pslab::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    /// One-line summary where a command has one, JSON otherwise.
    Text,
}

/// Column-ordered view of a report.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// Everything a command produces.
#[derive(Clone, Debug)]
pub struct Report {
    pub json: Value,
    pub table: Table,
    pub text: Option<String>,
}

pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap()
}

/// Rounds every float in place. Object keys are already sorted: serde_json's
/// map is ordered by key.
pub fn normalize(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round12(n.as_f64().unwrap());
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(normalize),
        Value::Object(map) => map.values_mut().for_each(normalize),
        _ => {}
    }
}

pub fn to_value<T: Serialize>(t: &T) -> Value {
    let mut v = serde_json::to_value(t).expect("reports serialize");
    normalize(&mut v);
    v
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) if n.is_f64() => {
            let mut c = v.clone();
            normalize(&mut c);
            c.to_string()
        }
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

pub fn render(report: &Report, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Text if report.text.is_some() => Ok(format!("{}\n", report.text.as_ref().unwrap()).into_bytes()),
        Format::Json | Format::Text => {
            let mut v = report.json.clone();
            normalize(&mut v);
            let mut out = serde_json::to_vec_pretty(&v).expect("json");
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io_err = |e: csv::Error| Error::Internal(format!("csv: {e}"));
            w.write_record(&report.table.headers).map_err(io_err)?;
            for row in &report.table.rows {
                w.write_record(row.iter().map(cell)).map_err(io_err)?;
            }
            w.into_inner().map_err(|e| Error::Internal(format!("csv: {e}")))
        }
    }
}

/// Writes the rendered report to `path`, or standard output when absent.
pub fn emit(report: &Report, format: Format, path: Option<&Path>) -> Result<()> {
    let bytes = render(report, format)?;
    match path {
        Some(p) => fs::write(p, &bytes).map_err(|e| Error::Resource(format!("{}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(&bytes)?;
            out.flush()?;
            Ok(())
        }
    }
}
