//! The JSON report envelope shared by every subcommand.
//!
//! Reports built with the same inputs, seed, and tool version serialize to
//! identical bytes once the timestamp is omitted: all maps are ordered,
//! floats use the shortest round-trip form, and no field depends on the
//! environment.

use serde::Serialize;
use serde_json::Value;
use std::time::{SystemTime, UNIX_EPOCH};

pub const SCHEMA: &str = "dualrail/1";

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    /// Tool version, from the package manifest.
    pub version: &'static str,
    /// The subcommand that produced this report.
    pub command: String,
    /// RNG seed, present when the command consumed randomness.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Unix seconds; omitted under `--no-timestamp` for byte-stable output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    /// Echo of the parsed inputs the results were computed from.
    pub inputs: Value,
    pub results: Value,
}

impl Report {
    pub fn new(command: &str, inputs: Value, results: Value) -> Self {
        Report {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed: None,
            timestamp: None,
            inputs,
            results,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn stamped(mut self) -> Self {
        self.timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .ok();
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report types always serialize")
    }
}

/// Render a JSON value as indented `key: value` lines for terminal output.
/// Long arrays are elided past a prefix; this is a human summary, the JSON
/// report is the machine surface.
pub fn render_human(value: &Value) -> String {
    let mut out = String::new();
    render_into(value, 0, &mut out);
    out
}

const MAX_ARRAY_PREFIX: usize = 16;

fn render_scalar(value: &Value) -> Option<String> {
    match value {
        Value::Null => Some("null".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()) => {
            let shown: Vec<String> = items
                .iter()
                .take(MAX_ARRAY_PREFIX)
                .map(|v| render_scalar(v).unwrap_or_default())
                .collect();
            let suffix = if items.len() > MAX_ARRAY_PREFIX {
                format!(", … {} total", items.len())
            } else {
                String::new()
            };
            Some(format!("[{}{}]", shown.join(", "), suffix))
        }
        _ => None,
    }
}

fn render_into(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            for (key, val) in map {
                if let Some(scalar) = render_scalar(val) {
                    out.push_str(&format!("{pad}{key}: {scalar}\n"));
                } else {
                    out.push_str(&format!("{pad}{key}:\n"));
                    render_into(val, indent + 1, out);
                }
            }
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                if i == MAX_ARRAY_PREFIX {
                    out.push_str(&format!("{pad}… {} total\n", items.len()));
                    break;
                }
                if let Some(scalar) = render_scalar(item) {
                    out.push_str(&format!("{pad}- {scalar}\n"));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render_into(item, indent + 1, out);
                }
            }
        }
        other => {
            if let Some(scalar) = render_scalar(other) {
                out.push_str(&format!("{pad}{scalar}\n"));
            }
        }
    }
}
