use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Map, Value};

use super::config::{Format, RunConfig};
use crate::error::{Result, TodaError};

/// Environment variable naming the default output directory.
pub const OUT_DIR_VAR: &str = "TODA_OUT_DIR";

/// Rows of a command's results plus free-form diagnostics.
#[derive(Clone, Debug, Default)]
pub struct CommandOutput {
    pub rows: Vec<Value>,
    pub diagnostics: Map<String, Value>,
    /// Failed invariants (verify) turn into a numerical exit status.
    pub failures: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub meta: Value,
    pub inputs: Value,
    pub results: Vec<Value>,
    pub diagnostics: Value,
}

impl Report {
    pub fn new(cfg: &RunConfig, out: CommandOutput) -> Result<Self> {
        let command = cfg.command.map(|c| c.name()).unwrap_or("none");
        Ok(Self {
            meta: json!({
                "tool": "toda",
                "version": env!("CARGO_PKG_VERSION"),
                "command": command,
                "schema": 1,
            }),
            inputs: to_value(cfg)?,
            results: out.rows,
            diagnostics: Value::Object(out.diagnostics),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let v = sorted(to_value(self)?);
        let mut s = serde_json::to_string_pretty(&v).map_err(|e| TodaError::Io(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Results only, one line per row, nested values flattened to dotted columns.
    pub fn to_csv(&self) -> Result<String> {
        let flat: Vec<BTreeMap<String, String>> = self
            .results
            .iter()
            .map(|r| {
                let mut m = BTreeMap::new();
                flatten("", r, &mut m);
                m
            })
            .collect();
        let header: BTreeSet<&String> = flat.iter().flat_map(|m| m.keys()).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| TodaError::Io(e.to_string());
        w.write_record(header.iter().map(|s| s.as_str())).map_err(io)?;
        for row in &flat {
            w.write_record(header.iter().map(|k| row.get(*k).map(String::as_str).unwrap_or("")))
                .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| TodaError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| TodaError::Io(e.to_string()))
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }
}

pub fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| TodaError::Io(e.to_string()))
}

fn sorted(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let b: BTreeMap<String, Value> = m.into_iter().map(|(k, v)| (k, sorted(v))).collect();
            Value::Object(b.into_iter().collect())
        }
        Value::Array(a) => Value::Array(a.into_iter().map(sorted).collect()),
        other => other,
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut BTreeMap<String, String>) {
    let key = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(m) => m.iter().for_each(|(k, x)| flatten(&key(k), x, out)),
        Value::Array(a) => a.iter().enumerate().for_each(|(i, x)| flatten(&key(&i.to_string()), x, out)),
        Value::String(s) => {
            out.insert(prefix.to_string(), s.clone());
        }
        Value::Null => {
            out.insert(prefix.to_string(), String::new());
        }
        other => {
            out.insert(prefix.to_string(), other.to_string());
        }
    }
}

/// Explicit path, else $TODA_OUT_DIR/<command>.<ext>, else None (stdout).
pub fn destination(cfg: &RunConfig) -> Option<PathBuf> {
    if let Some(p) = &cfg.output.path {
        return Some(p.clone());
    }
    let dir = std::env::var_os(OUT_DIR_VAR)?;
    let name = cfg.command.map(|c| c.name()).unwrap_or("run");
    Some(PathBuf::from(dir).join(format!("{name}.{}", cfg.output.format.extension())))
}

/// Writes the rendered report; returns the file written, if any.
pub fn emit(cfg: &RunConfig, report: &Report) -> Result<Option<PathBuf>> {
    let text = report.render(cfg.output.format)?;
    match destination(cfg) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| TodaError::Io(format!("{}: {e}", parent.display())))?;
            }
            std::fs::write(&path, text).map_err(|e| TodaError::Io(format!("{}: {e}", path.display())))?;
            Ok(Some(path))
        }
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| TodaError::Io(e.to_string()))?;
            Ok(None)
        }
    }
}
