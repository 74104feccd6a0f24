//! Deterministic machine output: JSON with numbers rounded to 12 significant
//! digits, and fixed-column CSV.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::CliError;

/// `x` rounded to 12 significant digits, with `-0` folded into `0`.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Decimal text with 12 significant digits; `inf`, `-inf` and `nan` spelled out.
pub fn fmt12(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        let r = round12(x);
        if r == 0.0 || (1e-6..1e15).contains(&r.abs()) {
            format!("{r}")
        } else {
            format!("{r:e}")
        }
    }
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or(f64::NAN);
            serde_json::Number::from_f64(round12(x)).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::failure(format!("serializing report: {e}")))?;
    let mut s = serde_json::to_string_pretty(&round_value(v)).map_err(|e| CliError::failure(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::failure(format!("writing CSV: {e}"));
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::failure(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::failure(e.to_string()))
}

/// Writes to `out`, or to stdout when absent.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::failure(e.to_string()))
        }
    }
}
