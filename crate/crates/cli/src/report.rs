//! Result records and their JSON and CSV renderings.

use std::fmt::Write as _;

use qinterp::zmap::Probability;
use qinterp::{exact_string, Exact};
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, Serialize)]
pub struct ConfigEcho {
    pub p: u32,
    pub r: u32,
    pub q: u64,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub workers: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Metric {
    pub name: String,
    /// `"num/den"` when the quantity is an exact rational.
    pub exact: Option<String>,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Record {
    pub command: String,
    pub config: ConfigEcho,
    pub metrics: Vec<Metric>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
    pub seed: u64,
    pub duration_ms: f64,
}

impl Record {
    pub fn new(command: &str, config: ConfigEcho, seed: u64) -> Self {
        Record {
            command: command.into(),
            config,
            metrics: Vec::new(),
            details: None,
            seed,
            duration_ms: 0.0,
        }
    }

    pub fn integer(&mut self, name: &str, v: u128) {
        self.metrics.push(Metric {
            name: name.into(),
            exact: Some(format!("{v}/1")),
            value: v as f64,
        });
    }

    pub fn exact(&mut self, name: &str, v: &Exact) {
        self.metrics.push(Metric {
            name: name.into(),
            exact: Some(exact_string(v)),
            value: *v.numer() as f64 / *v.denom() as f64,
        });
    }

    pub fn probability(&mut self, name: &str, p: &Probability) {
        self.metrics.push(Metric {
            name: name.into(),
            exact: Some(exact_string(&p.exact)),
            value: p.value,
        });
    }

    pub fn float(&mut self, name: &str, v: f64) {
        self.metrics.push(Metric {
            name: name.into(),
            exact: None,
            value: v,
        });
    }

    pub fn flag(&mut self, name: &str, v: bool) {
        self.integer(name, v as u128);
    }
}

#[derive(Serialize)]
struct Document<'a> {
    schema_version: u32,
    records: &'a [Record],
}

pub fn to_json(records: &[Record]) -> String {
    let doc = Document {
        schema_version: SCHEMA_VERSION,
        records,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("records serialize");
    s.push('\n');
    s
}

const CSV_HEADER: &str = "command,p,r,q,n,d,k,scope,variant,seed,metric,exact,value,duration_ms";

/// One row per metric. No field needs quoting: names are identifiers and
/// exact values are `num/den`.
pub fn to_csv(records: &[Record]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let c = &r.config;
        for m in &r.metrics {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.command,
                c.p,
                c.r,
                c.q,
                c.n,
                c.d,
                c.k,
                c.scope.as_deref().unwrap_or(""),
                c.variant.as_deref().unwrap_or(""),
                r.seed,
                m.name,
                m.exact.as_deref().unwrap_or(""),
                m.value,
                r.duration_ms
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_rows() {
        let mut r = Record::new("census", ConfigEcho::default(), 7);
        r.integer("range_all", 7);
        r.exact("ratio", &Exact::new(7, 9));
        let csv = to_csv(&[r]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 3);
        assert!(lines[2].contains(",ratio,7/9,"));
    }

    #[test]
    fn json_is_versioned() {
        let v: Value = serde_json::from_str(&to_json(&[])).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
    }
}
