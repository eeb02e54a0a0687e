//! Run reports and their text, JSON and CSV renderings.

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Default)]
pub enum Format {
    #[default]
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: Value,
    pub results: Value,
    /// Only filled with `--timing`, so default output stays reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<f64>,
}

/// 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "null".into(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => i.to_string(),
            (_, Some(u)) => u.to_string(),
            _ => fmt_f64(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => s.clone(),
        _ => unreachable!("not a scalar"),
    }
}

fn is_scalar_list(items: &[Value]) -> bool {
    items.iter().all(|v| !matches!(v, Value::Array(_) | Value::Object(_)))
}

fn render_value(out: &mut String, key: &str, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(map) => {
            out.push_str(&format!("{pad}{key}:\n"));
            render_map(out, map, indent + 1);
        }
        Value::Array(items) if is_scalar_list(items) => {
            let inner: Vec<String> = items.iter().map(scalar).collect();
            out.push_str(&format!("{pad}{key}: [{}]\n", inner.join(", ")));
        }
        Value::Array(items) => {
            out.push_str(&format!("{pad}{key}: ({} entries)\n", items.len()));
            for (i, item) in items.iter().enumerate() {
                render_value(out, &format!("[{i}]"), item, indent + 1);
            }
        }
        _ => out.push_str(&format!("{pad}{key}: {}\n", scalar(v))),
    }
}

fn render_map(out: &mut String, map: &Map<String, Value>, indent: usize) {
    for (k, v) in map {
        render_value(out, k, v, indent);
    }
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("command: {}\n", self.command);
        render_value(&mut out, "parameters", &self.parameters, 0);
        render_value(&mut out, "results", &self.results, 0);
        if let Some(t) = self.wall_time_ms {
            out.push_str(&format!("wall_time_ms: {t:.3}\n"));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// CSV with a fixed header; each row is already a list of rendered cells.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
