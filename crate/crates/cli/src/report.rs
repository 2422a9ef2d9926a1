//! Report envelope with deterministic JSON and CSV rendering.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::CliError;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().expect("formatted float")
}

/// Rounds every float and renders non-finite floats as strings.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => float_value(n.as_f64().expect("f64")),
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canonical(v))).collect()),
        other => other,
    }
}

pub fn float_value(x: f64) -> Value {
    match Number::from_f64(round_sig(x)) {
        Some(n) => Value::Number(n),
        None if x.is_nan() => Value::String("NaN".into()),
        None if x > 0.0 => Value::String("inf".into()),
        None => Value::String("-inf".into()),
    }
}

/// Rows with a fixed column order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|r| {
                    let m: Map<String, Value> = self
                        .header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.to_string(), v.clone()))
                        .collect();
                    Value::Object(m)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub checks: Vec<Check>,
    /// Rows whose asserted bound failed.
    pub violations: usize,
    /// Rows whose computation returned an error.
    pub failures: usize,
    pub pass: bool,
}

/// Command results before wrapping.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    /// Command-specific values beside the table.
    pub extra: Map<String, Value>,
    pub checks: Vec<Check>,
    pub violations: usize,
    pub failures: usize,
}

impl Outcome {
    pub fn new(table: Table) -> Self {
        Outcome {
            table,
            extra: Map::new(),
            checks: Vec::new(),
            violations: 0,
            failures: 0,
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail,
        });
    }

    pub fn extra(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).expect("serializable");
        self.extra.insert(key.into(), v);
    }
}

/// The emitted report. Wall time is deliberately absent so reruns are
/// byte-identical.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportEnvelope {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: Value,
    pub outcome: Outcome,
}

impl ReportEnvelope {
    pub fn new(command: &str, config: Value, outcome: Outcome) -> Self {
        ReportEnvelope {
            tool: "qbsim",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config,
            outcome,
        }
    }

    pub fn summary(&self) -> Summary {
        let o = &self.outcome;
        Summary {
            checks: o.checks.clone(),
            violations: o.violations,
            failures: o.failures,
            pass: o.violations == 0 && o.failures == 0 && o.checks.iter().all(|c| c.passed),
        }
    }

    pub fn passed(&self) -> bool {
        self.summary().pass
    }

    pub fn to_value(&self) -> Value {
        let mut results = self.outcome.extra.clone();
        results.insert(
            "columns".into(),
            Value::Array(self.outcome.table.header.iter().map(|h| Value::String(h.to_string())).collect()),
        );
        results.insert("rows".into(), self.outcome.table.to_json());
        let mut top = Map::new();
        top.insert("tool".into(), Value::String(self.tool.into()));
        top.insert("version".into(), Value::String(self.version.into()));
        top.insert("command".into(), Value::String(self.command.clone()));
        top.insert("config".into(), self.config.clone());
        top.insert("results".into(), Value::Object(results));
        top.insert("summary".into(), serde_json::to_value(self.summary()).expect("serializable"));
        canonical(Value::Object(top))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&sorted(self.to_value())).expect("serializable");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let t = &self.outcome.table;
        w.write_record(&t.header).map_err(|e| CliError::Io(e.to_string()))?;
        for row in &t.rows {
            w.write_record(row.iter().map(|v| csv_cell(&canonical(v.clone()))))
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("utf-8"))
    }
}

/// Key order does not depend on serde_json's map backend.
fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            Value::Object(entries.into_iter().map(|(k, v)| (k, sorted(v))).collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(_) | Value::Object(_) => v.to_string(),
        other => other.to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes the report to `path`, or to stdout when `None`.
pub fn emit_report(env: &ReportEnvelope, format: Format, path: Option<&Path>) -> Result<(), CliError> {
    let text = match format {
        Format::Json => env.to_json(),
        Format::Csv => env.to_csv()?,
    };
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}
