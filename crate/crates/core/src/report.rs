//! Command reports in JSON, text and CSV.
//!
//! Numbers are stored once as JSON values; the text form prints the same
//! serialized tokens, so both formats carry identical digits. Infinite values
//! are written as the strings `"inf"` and `"-inf"`.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::measure::DiscreteMeasure;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
    Csv,
}

/// A JSON number, or a string for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_nan() {
        Value::String("nan".into())
    } else if x == f64::INFINITY {
        Value::String("inf".into())
    } else if x == f64::NEG_INFINITY {
        Value::String("-inf".into())
    } else {
        // -0.0 prints as "-0.0" otherwise
        Value::from(if x == 0.0 { 0.0 } else { x })
    }
}

pub fn nums(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| num(x)).collect())
}

pub fn matrix(rows: &[Vec<f64>]) -> Value {
    Value::Array(rows.iter().map(|r| nums(r)).collect())
}

pub fn measure(q: &DiscreteMeasure) -> Value {
    nums(q.weights())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub residual: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Outcome of one command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    /// Arguments as given, including the effective seed where relevant.
    pub arguments: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_digest: Option<String>,
    pub results: Map<String, Value>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    /// Only with `--timing`; reports are otherwise byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    /// Rows for CSV output.
    #[serde(skip)]
    pub table: Option<Table>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            arguments: Map::new(),
            input_digest: None,
            results: Map::new(),
            checks: Vec::new(),
            warnings: Vec::new(),
            elapsed_ms: None,
            table: None,
        }
    }

    pub fn arg(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.arguments.insert(key.to_string(), value.into());
        self
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.results.insert(key.to_string(), value.into());
        self
    }

    /// Records a check whose residual must not exceed `tol`.
    pub fn check_residual(&mut self, name: &str, residual: f64, tol: f64) {
        self.checks.push(Check {
            name: name.to_string(),
            passed: residual.is_finite() && residual <= tol,
            residual: num(residual),
            detail: None,
        });
    }

    pub fn check(
        &mut self,
        name: &str,
        passed: bool,
        residual: Option<f64>,
        detail: Option<String>,
    ) {
        self.checks.push(Check {
            name: name.to_string(),
            passed,
            residual: residual.map_or(Value::Null, num),
            detail,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command: {}", self.command);
        for (k, v) in &self.arguments {
            let _ = writeln!(out, "  {k} = {}", token(v));
        }
        if let Some(d) = &self.input_digest {
            let _ = writeln!(out, "input_digest: {d}");
        }
        out.push_str("results:\n");
        let mut lines = Vec::new();
        flatten("", &Value::Object(self.results.clone()), &mut lines);
        for (path, v) in lines {
            let _ = writeln!(out, "  {path} = {v}");
        }
        if !self.checks.is_empty() {
            out.push_str("checks:\n");
            for c in &self.checks {
                let _ = write!(
                    out,
                    "  {} {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name
                );
                if !c.residual.is_null() {
                    let _ = write!(out, " residual = {}", token(&c.residual));
                }
                if let Some(d) = &c.detail {
                    let _ = write!(out, " ({d})");
                }
                out.push('\n');
            }
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        if let Some(ms) = self.elapsed_ms {
            let _ = writeln!(out, "elapsed_ms: {}", token(&num(ms)));
        }
        out
    }

    /// CSV of the report table; an empty string when there is none.
    pub fn to_csv(&self) -> String {
        let Some(table) = &self.table else {
            return String::new();
        };
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&table.header).expect("in-memory write");
        for row in &table.rows {
            w.write_record(row.iter().map(token))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Text => self.to_text(),
            Format::Csv => self.to_csv(),
        }
    }
}

/// Compact JSON token; strings lose their quotes.
fn token(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => serde_json::to_string(other).expect("value serializes"),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                let path = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&path, child, out);
            }
        }
        Value::Array(items) if items.iter().any(|v| v.is_object()) => {
            for (i, child) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), child, out);
            }
        }
        other => out.push((prefix.to_string(), token(other))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinities_are_strings() {
        assert_eq!(num(f64::NEG_INFINITY), Value::String("-inf".into()));
        assert_eq!(num(f64::INFINITY), Value::String("inf".into()));
        assert_eq!(num(-0.0).to_string(), "0.0");
    }

    #[test]
    fn text_numbers_appear_in_json() {
        let mut r = Report::new("x");
        r.set("value", num(0.1 + 0.2));
        r.set(
            "nested",
            serde_json::json!({ "a": nums(&[1.0 / 3.0, f64::NEG_INFINITY]) }),
        );
        r.check_residual("c", 1e-17, 1e-9);
        let text = r.to_text();
        let json = r.to_json();
        for tok in ["0.30000000000000004", "0.3333333333333333", "1e-17"] {
            assert!(text.contains(tok) && json.contains(tok), "{tok}");
        }
        assert!(text.contains("nested.a = [0.3333333333333333,\"-inf\"]"));
    }

    #[test]
    fn csv_rows() {
        let mut r = Report::new("bounds");
        r.table = Some(Table {
            header: vec!["epsilon".into(), "holds".into()],
            rows: vec![vec![num(0.5), Value::Bool(true)]],
        });
        assert_eq!(r.to_csv(), "epsilon,holds\n0.5,true\n");
    }
}
