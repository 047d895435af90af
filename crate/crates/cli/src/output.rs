use serde_json::{json, Map, Value};

use crate::config::Settings;
use crate::Cli;

/// Finite numbers as JSON numbers; ±inf and nan as strings.
pub(crate) fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("nan")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

/// `{"command","config","results","version"}` with keys in sorted order.
pub(crate) struct Envelope {
    pub command: &'static str,
    pub config: Value,
    pub results: Vec<Value>,
}

impl Envelope {
    pub fn new(command: &'static str, cli: &Cli, s: &Settings) -> Self {
        let mut config = serde_json::to_value(&s.experiment).expect("config serializes");
        config["bits"] = json!(cli.bits);
        Self {
            command,
            config,
            results: Vec::new(),
        }
    }

    pub fn to_value(&self) -> Value {
        json!({
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "version": env!("CARGO_PKG_VERSION"),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("envelope serializes") + "\n"
    }

    /// One block per result, `key  value` lines; nested objects are flattened
    /// with dotted keys and matrices are left to the JSON form.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.results.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            let mut lines = Vec::new();
            if let Value::Object(m) = r {
                flatten("", m, &mut lines);
            }
            let width = lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
            for (k, v) in lines {
                out.push_str(&format!("{k:<width$}  {v}\n"));
            }
        }
        out
    }
}

fn flatten(prefix: &str, m: &Map<String, Value>, lines: &mut Vec<(String, String)>) {
    for (k, v) in m {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Object(inner) if k != "coeffs" && k != "optimizer" => {
                flatten(&key, inner, lines)
            }
            Value::Object(_) | Value::Array(_) => {}
            Value::String(s) => lines.push((key, s.clone())),
            other => lines.push((key, other.to_string())),
        }
    }
}
