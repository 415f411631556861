//! Versioned JSON reports.
//!
//! A report echoes its configuration and carries one `results` section.
//! Floats are rounded to 12 significant digits so that the section is
//! byte-identical across runs with equal configuration. Wall-clock time is
//! kept outside `results`.

use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Number, Value};

use crate::error::Result;

pub const SCHEMA: &str = "rss-report/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub config: Value,
    pub results: Value,
    pub wall_clock_ms: u64,
}

impl Report {
    pub fn new(command: &str, config: &impl Serialize, results: &impl Serialize) -> Result<Report> {
        Ok(Report {
            schema: SCHEMA.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: round_floats(serde_json::to_value(config)?),
            results: round_floats(serde_json::to_value(results)?),
            wall_clock_ms: 0,
        })
    }

    pub fn with_wall_clock(mut self, elapsed: std::time::Duration) -> Report {
        self.wall_clock_ms = elapsed.as_millis() as u64;
        self
    }

    /// The `results` section as compact JSON.
    pub fn results_json(&self) -> String {
        serde_json::to_string(&self.results).expect("json values serialize")
    }

    pub fn to_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("json values serialize")
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_pretty() + "\n")?;
        Ok(())
    }
}

/// `x` rounded to `digits` significant decimal digits.
pub fn round_significant(x: f64, digits: usize) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// Rounds every non-integer number in `v` to 12 significant digits.
pub fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_significant(n.as_f64().expect("f64 number"), 12);
            Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect::<Map<_, _>>()),
        other => other,
    }
}
