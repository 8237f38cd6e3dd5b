use std::fmt::Display;
use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use kummer_core::report::{CheckReport, SCHEMA_VERSION};
use kummer_core::seq::EvenSeq;

use crate::Format;

/// One result rendered three ways.
pub struct Doc {
    pub json: Map<String, Value>,
    pub csv: Vec<Vec<String>>,
    pub text: String,
}

impl Doc {
    pub fn new(kind: &str) -> Self {
        let mut json = Map::new();
        json.insert("schema_version".into(), json!(SCHEMA_VERSION));
        json.insert("kind".into(), json!(kind));
        Self { json, csv: Vec::new(), text: String::new() }
    }

    pub fn set(&mut self, key: &str, value: Value) {
        self.json.insert(key.into(), value);
    }

    pub fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    pub fn csv_row<I: IntoIterator<Item = S>, S: ToString>(&mut self, row: I) {
        self.csv.push(row.into_iter().map(|s| s.to_string()).collect());
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&Value::Object(self.json.clone()))
                    .expect("serializable");
                s.push('\n');
                s
            }
            Format::Csv => self.csv.iter().map(|r| r.join(",") + "\n").collect(),
            Format::Text => self.text.clone(),
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> std::io::Result<()> {
        let body = self.render(format);
        match out {
            Some(path) => std::fs::write(path, body),
            None => std::io::stdout().lock().write_all(body.as_bytes()),
        }
    }
}

pub fn strings<T: Display>(v: &[T]) -> Value {
    Value::Array(v.iter().map(|x| json!(x.to_string())).collect())
}

/// `{"start_weight": 2m, "values": [...]}`.
pub fn seq_json<T: Display>(seq: &EvenSeq<T>) -> Value {
    json!({ "start_weight": 2 * seq.m(), "values": strings(seq.entries()) })
}

pub fn seq_csv<T: Display>(doc: &mut Doc, seq: &EvenSeq<T>) {
    doc.csv_row(["weight", "value"]);
    for (k, v) in seq.iter() {
        doc.csv_row([(2 * k).to_string(), v.to_string()]);
    }
}

pub fn seq_text<T: Display>(doc: &mut Doc, name: &str, seq: &EvenSeq<T>) {
    for (k, v) in seq.iter() {
        doc.line(format!("{name}_{} = {v}", 2 * k));
    }
}

pub fn report_json(report: &CheckReport) -> Value {
    serde_json::to_value(report).expect("serializable")
}

pub fn report_into(doc: &mut Doc, report: &CheckReport) {
    doc.set("report", report_json(report));
    doc.csv_row(["check", "status", "prime", "first_failure_weight", "required_valuation", "observed_valuation", "truncation"]);
    let opt = |v: Option<String>| v.unwrap_or_default();
    doc.csv_row([
        report.check.clone(),
        if report.passed() { "pass".into() } else { "fail".into() },
        opt(report.prime.map(|p| p.to_string())),
        opt(report.first_failure_weight.map(|w| w.to_string())),
        opt(report.required_valuation.map(|v| v.to_string())),
        opt(report.observed_valuation.map(|v| v.to_string())),
        report.truncation.to_string(),
    ]);
    doc.line(format!(
        "{}: {} (up to half-weight {})",
        report.check,
        if report.passed() { "PASS" } else { "FAIL" },
        report.truncation
    ));
    doc.line(&report.detail);
}
