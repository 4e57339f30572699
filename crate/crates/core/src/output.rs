//! Deterministic CSV/JSON emission with atomic writes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// 15 significant digits, scientific notation, `.` decimal separator.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        // Avoid "-0".
        return "0.00000000000000e0".into();
    }
    format!("{:.14e}", x)
}

/// Re-serializes through `serde_json::Value`, whose maps are ordered, so keys
/// come out sorted.
pub fn to_sorted_json(v: &Value) -> String {
    let sorted: Value = serde_json::from_str(&v.to_string()).expect("valid json");
    let mut s = serde_json::to_string_pretty(&sorted).expect("serializable");
    s.push('\n');
    s
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// CSV builder: a provenance comment line, a header, then rows.
#[derive(Debug, Clone)]
pub struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub fn new(config_hash: &str, header: &[&str]) -> Self {
        let mut text = format!("# config-hash: {config_hash}\n");
        text.push_str(&header.join(","));
        text.push('\n');
        Self {
            text,
            columns: header.len(),
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.columns, "row width must match header");
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Writes `contents` to a sibling temp file, then renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(contents.as_bytes()).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
