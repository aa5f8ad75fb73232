//! JSON reports with a hashable body and a separate metadata block, plus CSV
//! dumps for point clouds.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Run-dependent data (timings, versions) kept out of the hash.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub elapsed_ms: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub timings_ms: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub result: Value,
    /// sha256 of `{command, config, result}`.
    pub hash: String,
    pub metadata: Metadata,
}

impl Report {
    pub fn new(command: impl Into<String>, config: impl Serialize, result: impl Serialize) -> Result<Self> {
        let command = command.into();
        let config = serde_json::to_value(config)?;
        let result = serde_json::to_value(result)?;
        let hash = body_hash(&command, &config, &result)?;
        Ok(Self {
            command,
            config,
            result,
            hash,
            metadata: Metadata {
                version: env!("CARGO_PKG_VERSION"),
                ..Default::default()
            },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Hash of the deterministic part of a report.
pub fn body_hash(command: &str, config: &Value, result: &Value) -> Result<String> {
    let body = serde_json::to_vec(&serde_json::json!({
        "command": command,
        "config": config,
        "result": result,
    }))?;
    Ok(hex(&Sha256::digest(&body)))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

/// Writes `bytes` to a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = temp_path(path);
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_report(path: &Path, report: &Report) -> Result<()> {
    let mut s = report.to_json()?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

/// CSV with a header row, written atomically.
pub fn write_csv<const N: usize>(path: &Path, header: [&str; N], rows: &[[f64; N]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:?}")))?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    write_atomic(path, &bytes)
}

/// `foo.json` → `foo.<suffix>.csv`.
pub fn sibling_csv(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_ignores_metadata() {
        let mut a = Report::new("x", serde_json::json!({"n": 2}), vec![0.1, 0.2]).unwrap();
        let b = Report::new("x", serde_json::json!({"n": 2}), vec![0.1, 0.2]).unwrap();
        a.metadata.elapsed_ms = 123.0;
        assert_eq!(a.hash, b.hash);
        let c = Report::new("x", serde_json::json!({"n": 3}), vec![0.1, 0.2]).unwrap();
        assert_ne!(a.hash, c.hash);
    }

    #[test]
    fn floats_round_trip() {
        let v = [0.1f64, 1.0 / 3.0, std::f64::consts::LN_2, 1e-300, 5e-324];
        let s = serde_json::to_string(&v).unwrap();
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn atomic_files() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/r.json");
        let r = Report::new("x", (), 1).unwrap();
        write_report(&p, &r).unwrap();
        let v: Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(v["hash"], r.hash);
        let c = sibling_csv(&p, "points");
        write_csv(&c, ["x", "y"], &[[0.5, 0.25]]).unwrap();
        assert_eq!(fs::read_to_string(&c).unwrap(), "x,y\n0.5,0.25\n");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 2);
    }
}
