//! Self-describing CSV and JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::config::ResolvedConfig;
use crate::error::LabError;

pub const ARTIFACT_VERSION: u32 = 1;

/// Where a run writes, plus what it stamps on every file.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub dir: PathBuf,
    pub config: ResolvedConfig,
    pub written: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new(dir: &Path, config: ResolvedConfig) -> Result<Self, LabError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            config,
            written: Vec::new(),
        })
    }

    pub fn meta(&self) -> Value {
        json!({
            "tool": "nslab",
            "tool_version": env!("CARGO_PKG_VERSION"),
            "artifact_version": ARTIFACT_VERSION,
            "subcommand": self.config.subcommand,
            "config": self.config.values,
            "config_sha256": self.config.hash(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// `{"meta": ..., <body fields>}`, pretty-printed with a trailing newline.
    pub fn write_json(&mut self, name: &str, body: Value) -> Result<PathBuf, LabError> {
        let mut obj = serde_json::Map::new();
        obj.insert("meta".into(), self.meta());
        match body {
            Value::Object(m) => obj.extend(m),
            other => {
                obj.insert("data".into(), other);
            }
        }
        let mut text = serde_json::to_string_pretty(&Value::Object(obj)).expect("serialisable");
        text.push('\n');
        let p = self.path(name);
        fs::write(&p, text)?;
        self.written.push(p.clone());
        Ok(p)
    }

    /// CSV with `#` comment lines carrying the meta block, then a header row
    /// and the records.
    pub fn write_csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: &[Vec<String>],
    ) -> Result<PathBuf, LabError> {
        let mut buf = csv_preamble(&self.meta());
        {
            let mut w = csv::Writer::from_writer(&mut buf);
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        let p = self.path(name);
        fs::write(&p, buf)?;
        self.written.push(p.clone());
        Ok(p)
    }

    pub fn write_snapshot(&mut self, name: &str, u: &nslab_core::SpectralField) -> Result<PathBuf, LabError> {
        let p = self.path(name);
        crate::cgns::write(&p, u)?;
        self.written.push(p.clone());
        Ok(p)
    }
}

fn csv_preamble(meta: &Value) -> Vec<u8> {
    let mut s = String::new();
    s.push_str(&format!(
        "# nslab {} artifact {}\n",
        env!("CARGO_PKG_VERSION"),
        ARTIFACT_VERSION
    ));
    s.push_str(&format!("# subcommand: {}\n", meta["subcommand"].as_str().unwrap_or("")));
    s.push_str(&format!("# config: {}\n", meta["config"]));
    s.push_str(&format!("# config_sha256: {}\n", meta["config_sha256"].as_str().unwrap_or("")));
    s.into_bytes()
}

/// Shortest round-trip text of a float.
pub fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:e}")
    }
}

/// JSON-safe float: non-finite values become strings.
pub fn jnum(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("nan")
    } else {
        json!(num(v))
    }
}

pub fn jlist(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|x| jnum(*x)).collect())
}
