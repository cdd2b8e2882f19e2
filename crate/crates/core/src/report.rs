//! JSON-lines reports: one object per check, in canonical id order.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub id: String,
    pub claim: String,
    pub parameters: Value,
    pub mode: Mode,
    pub values: Value,
    pub pass: bool,
}

impl Record {
    pub fn new(id: impl Into<String>, claim: impl Into<String>, mode: Mode) -> Self {
        Record {
            id: id.into(),
            claim: claim.into(),
            parameters: Value::Object(Default::default()),
            mode,
            values: Value::Object(Default::default()),
            pass: true,
        }
    }

    pub fn parameters(mut self, parameters: Value) -> Self {
        self.parameters = parameters;
        self
    }

    pub fn values(mut self, values: Value) -> Self {
        self.values = values;
        self
    }

    pub fn pass(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    records: Vec<Record>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, record: Record) {
        self.records.push(record);
    }

    pub fn extend(&mut self, records: impl IntoIterator<Item = Record>) {
        self.records.extend(records);
    }

    /// Records sorted by id; ties keep insertion order.
    pub fn records(&self) -> Vec<&Record> {
        let mut out: Vec<&Record> = self.records.iter().collect();
        out.sort_by(|a, b| a.id.cmp(&b.id));
        out
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.records()
            .into_iter()
            .filter(|r| !r.pass)
            .map(|r| r.id.as_str())
            .collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in self.records() {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(self.to_jsonl().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn canonical_order() {
        let mut r = Report::new();
        r.push(Record::new("c02", "b", Mode::Mc).pass(false));
        r.push(Record::new("c01", "a", Mode::Exact).values(json!({"count": 2})));
        let text = r.to_jsonl();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            r#"{"id":"c01","claim":"a","parameters":{},"mode":"exact","values":{"count":2},"pass":true}"#
        );
        assert!(lines[1].contains(r#""mode":"mc""#));
        assert!(!r.all_pass());
        assert_eq!(r.failures(), vec!["c02"]);
    }
}
