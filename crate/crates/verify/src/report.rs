use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;

/// One instance of one inequality, normalized so that `margin = rhs − lhs`
/// must be non-negative up to `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub check: String,
    /// Seed the instance was generated from.
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Row {
    /// Row for `lhs ≤ rhs`.
    pub fn le(check: &str, seed: u64, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = rhs - lhs;
        Self::with_margin(check, seed, lhs, rhs, margin, tolerance)
    }

    /// Row for `lhs = rhs`, with margin `−|lhs − rhs|`.
    pub fn eq(check: &str, seed: u64, lhs: f64, rhs: f64, tolerance: f64) -> Self {
        let margin = -(lhs - rhs).abs();
        Self::with_margin(check, seed, lhs, rhs, margin, tolerance)
    }

    fn with_margin(
        check: &str,
        seed: u64,
        lhs: f64,
        rhs: f64,
        margin: f64,
        tolerance: f64,
    ) -> Self {
        // ∞ ≤ ∞ holds; NaN never does
        let margin = if lhs == rhs { 0.0 } else { margin };
        let pass = margin >= -tolerance;
        Self {
            check: check.to_string(),
            seed,
            lhs,
            rhs,
            margin,
            tolerance,
            pass,
            note: None,
        }
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn new(config: ExperimentConfig) -> Self {
        Self {
            config,
            rows: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn rows_of<'a>(&'a self, check: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.check == check)
    }

    /// Smallest `margin + tolerance`; negative iff some row fails.
    pub fn worst_slack(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.margin + r.tolerance)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["check", "seed", "lhs", "rhs", "margin", "pass"])?;
        for r in &self.rows {
            w.write_record([
                r.check.clone(),
                r.seed.to_string(),
                num(r.lhs),
                num(r.rhs),
                num(r.margin),
                r.pass.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_value()).expect("report serializes")
    }

    /// JSON value; non-finite numbers become strings.
    pub fn to_value(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut v = serde_json::json!({
                    "check": r.check,
                    "seed": r.seed,
                    "lhs": json_num(r.lhs),
                    "rhs": json_num(r.rhs),
                    "margin": json_num(r.margin),
                    "tolerance": r.tolerance,
                    "pass": r.pass,
                });
                if let Some(n) = &r.note {
                    v["note"] = serde_json::Value::String(n.clone());
                }
                v
            })
            .collect();
        serde_json::json!({ "config": self.config, "rows": rows })
    }
}

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:e}")
    }
}

pub(crate) fn json_num(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::json!(x)
    } else {
        serde_json::Value::String(num(x))
    }
}
