use std::collections::BTreeSet;
use std::io::Write;

use serde_json::{json, Map, Value};

use crate::args::Format;

/// Output document: echoed configuration, result rows and assertion outcomes.
#[derive(Debug)]
pub struct Report {
    config: Value,
    rows: Vec<Value>,
    passed: u64,
    failed: Vec<String>,
}

impl Report {
    pub fn new(config: Value) -> Self {
        Report {
            config,
            rows: Vec::new(),
            passed: 0,
            failed: Vec::new(),
        }
    }

    /// Adds a row tagged with `kind`.
    pub fn push(&mut self, kind: &str, row: Value) {
        let mut obj = match row {
            Value::Object(m) => m,
            other => {
                let mut m = Map::new();
                m.insert("value".into(), other);
                m
            }
        };
        obj.insert("kind".into(), Value::String(kind.into()));
        self.rows.push(Value::Object(obj));
    }

    pub fn check(&mut self, ok: bool, label: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(label());
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tool_version": env!("CARGO_PKG_VERSION"),
            "config_echo": self.config,
            "rows": self.rows,
            "assertions": { "passed": self.passed, "failed": self.failed },
        })
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> std::io::Result<()> {
        match format {
            Format::Json => {
                serde_json::to_writer_pretty(&mut *out, &self.to_json())?;
                writeln!(out)
            }
            Format::Csv => self.write_csv(out),
        }
    }

    /// One column per key seen in any row, in sorted order.
    fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let columns: BTreeSet<&str> = self
            .rows
            .iter()
            .filter_map(Value::as_object)
            .flat_map(|m| m.keys().map(String::as_str))
            .collect();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&columns)?;
        for row in &self.rows {
            w.write_record(columns.iter().map(|c| cell(row.get(*c))))?;
        }
        w.flush()
    }
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(other) => other.to_string(),
    }
}
