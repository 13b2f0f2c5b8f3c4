//! JSON reports and CSV tables.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), object keys
//! are sorted, and non-finite values become `null`, so identical inputs give
//! byte-identical files.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use crate::error::{AcxError, Result};

pub const SCHEMA: u32 = 1;

/// One named pass/fail check.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    /// Stable identifier of the identity or equation being checked.
    pub tag: String,
    pub value: f64,
    pub tolerance: f64,
    /// `"lt"`: pass iff `value < tolerance`; `"gt"`: iff `value > tolerance`;
    /// `"flag"`: boolean outcome recorded in `pass`.
    pub relation: String,
    pub pass: bool,
}

impl Check {
    pub fn below(name: &str, tag: &str, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), tag: tag.into(), value, tolerance, relation: "lt".into(), pass: value < tolerance }
    }

    pub fn above(name: &str, tag: &str, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), tag: tag.into(), value, tolerance, relation: "gt".into(), pass: value > tolerance }
    }

    pub fn flag(name: &str, tag: &str, pass: bool) -> Self {
        Check {
            name: name.into(),
            tag: tag.into(),
            value: if pass { 1.0 } else { 0.0 },
            tolerance: 1.0,
            relation: "flag".into(),
            pass,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

impl ErrorInfo {
    pub fn from_error(e: &AcxError) -> Self {
        let kind = match e {
            AcxError::Config(_) => "config",
            AcxError::Parse(_) => "parse",
            AcxError::Io(_) => "io",
            AcxError::Dimension(..) => "dimension",
            _ => "assembly",
        };
        ErrorInfo { kind: kind.into(), message: e.to_string() }
    }
}

/// A row of a CSV table.
#[derive(Clone, Debug)]
pub struct Row {
    pub coords: Vec<f64>,
    pub quantity: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub name: String,
    pub coord_names: Vec<String>,
    pub rows: Vec<Row>,
}

impl Table {
    pub fn new(name: &str, coord_names: &[&str]) -> Self {
        Table { name: name.into(), coord_names: coord_names.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Coordinates `x0 … x{m−1}`.
    pub fn with_dim(name: &str, m: usize) -> Self {
        Table { name: name.into(), coord_names: (0..m).map(|k| format!("x{k}")).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, coords: &[f64], quantity: &str, value: f64, tolerance: f64, pass: bool) {
        self.rows.push(Row { coords: coords.to_vec(), quantity: quantity.into(), value, tolerance, pass });
    }

    /// Row whose pass flag is `value < tolerance`.
    pub fn push_below(&mut self, coords: &[f64], quantity: &str, value: f64, tolerance: f64) {
        self.push(coords, quantity, value, tolerance, value < tolerance);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = self.coord_names.clone();
        header.extend(["quantity", "value", "tolerance", "pass"].map(String::from));
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.rows {
            let mut rec: Vec<String> = r.coords.iter().map(|v| fmt_f64(*v)).collect();
            rec.resize(self.coord_names.len(), String::new());
            rec.push(r.quantity.clone());
            rec.push(fmt_f64(r.value));
            rec.push(fmt_f64(r.tolerance));
            rec.push(r.pass.to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| AcxError::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn csv_err(e: csv::Error) -> AcxError {
    AcxError::Io(std::io::Error::other(e.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub config_hash: String,
    /// `"pass"`, `"fail"` or `"error"`.
    pub status: String,
    pub error: Option<ErrorInfo>,
    pub checks: Vec<Check>,
    pub data: Value,
    #[serde(skip)]
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &str, config_hash: &str) -> Self {
        Report {
            schema: SCHEMA,
            command: command.into(),
            config_hash: config_hash.into(),
            status: "pass".into(),
            error: None,
            checks: Vec::new(),
            data: Value::Object(Default::default()),
            tables: Vec::new(),
        }
    }

    pub fn check(&mut self, c: Check) {
        self.checks.push(c);
    }

    /// Stores a serializable value under `key` in `data`.
    pub fn set(&mut self, key: &str, v: impl Serialize) {
        let v = serde_json::to_value(v).unwrap_or(Value::Null);
        if let Value::Object(m) = &mut self.data {
            m.insert(key.into(), v);
        }
    }

    pub fn table(&mut self, t: Table) {
        self.tables.push(t);
    }

    pub fn error(command: &str, config_hash: &str, e: &AcxError) -> Self {
        let mut r = Report::new(command, config_hash);
        r.status = "error".into();
        r.error = Some(ErrorInfo::from_error(e));
        r
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.checks.iter().all(|c| c.pass)
    }

    /// Sets `status` from the checks.
    pub fn finish(mut self) -> Self {
        if self.error.is_none() {
            self.status = if self.passed() { "pass" } else { "fail" }.into();
        }
        self
    }

    /// 0 = pass, 1 = a check failed, 2 = configuration or assembly error.
    pub fn exit_code(&self) -> i32 {
        match (self.error.is_some(), self.passed()) {
            (true, _) => 2,
            (false, true) => 0,
            (false, false) => 1,
        }
    }

    pub fn to_json(&self) -> String {
        let v = serde_json::to_value(self).expect("report serializes");
        let mut s = String::new();
        write_value(&v, 0, &mut s);
        s.push('\n');
        s
    }

    /// Writes `<command>.json` and `<command>_<table>.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut out = Vec::new();
        let json = dir.join(format!("{}.json", self.command));
        std::fs::write(&json, self.to_json())?;
        out.push(json);
        for t in &self.tables {
            let p = dir.join(format!("{}_{}.csv", self.command, t.name));
            std::fs::write(&p, t.to_csv()?)?;
            out.push(p);
        }
        Ok(out)
    }
}

/// 17 significant digits; `null`-free callers should check finiteness.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() { format!("{v:.16e}") } else { format!("{v}") }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |k: usize| "  ".repeat(k);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                if f.is_finite() { out.push_str(&format!("{f:.16e}")) } else { out.push_str("null") }
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(a) => {
            if a.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, x) in a.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(x, indent + 1, out);
                if k + 1 < a.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(m) => {
            if m.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            let mut keys: Vec<&String> = m.keys().collect();
            keys.sort();
            for (k, key) in keys.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                write_value(&m[*key], indent + 1, out);
                if k + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        let mut r = Report::new("t", "h");
        r.set("x", 0.1);
        r.set("k", 3u32);
        let s = r.to_json();
        assert!(s.contains("\"x\": 1.0000000000000001e-1"), "{s}");
        assert!(s.contains("\"k\": 3"));
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["data"]["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn non_finite_becomes_null() {
        let mut r = Report::new("t", "h");
        r.check(Check::below("c", "tag", f64::NAN, 1.0));
        assert!(r.to_json().contains("\"value\": null"));
    }

    #[test]
    fn exit_codes() {
        let mut r = Report::new("t", "h");
        assert_eq!(r.exit_code(), 0);
        r.check(Check::below("c", "tag", 2.0, 1.0));
        assert_eq!(r.exit_code(), 1);
        assert_eq!(Report::error("t", "h", &AcxError::Config("x".into())).exit_code(), 2);
    }
}
