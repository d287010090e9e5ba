//! JSON and CSV writers shared by all subcommands.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use kthstop_core::exact_math::decimal_string;
use kthstop_core::Rational;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::Failure;

pub const SCHEMA: &str = "kthstop/1";

/// `{"num", "den", "decimal"}` with decimal strings.
pub fn rational(r: &Rational) -> Value {
    json!({
        "num": r.numer().to_string(),
        "den": r.denom().to_string(),
        "decimal": decimal_string(r, 15),
    })
}

/// Serializes `body` and puts the schema tag first.
pub fn tagged<T: Serialize>(body: &T) -> Value {
    let mut out = Map::new();
    out.insert("schema".into(), Value::from(SCHEMA));
    match serde_json::to_value(body).expect("report types serialize") {
        Value::Object(fields) => out.extend(fields),
        other => {
            out.insert("data".into(), other);
        }
    }
    Value::Object(out)
}

pub fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

pub fn csv_text(header: &[String], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

pub fn stdout(text: &str) -> Result<(), Failure> {
    io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::output(format!("stdout: {e}")))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::output(format!("{}: {e}", path.display())))
}
