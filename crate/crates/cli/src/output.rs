//! Deterministic file emitters. Every artifact is a pure function of the
//! manifest: floats are printed with a fixed 17-significant-digit format,
//! JSON objects come from structs or sorted maps, and nothing records
//! timestamps, hostnames, or thread counts, so repeated runs are
//! byte-identical.

use rotation_lab::{Error, Result};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

/// Round-trip-exact float text (17 significant digits, scientific).
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Wrap an io error with the path it happened on.
fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidInput(format!("cannot write {}: {e}", path.display()))
}

/// Write `name` under `dir` as CSV; rows are pre-formatted cells.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len(), "ragged CSV row in {name}");
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(&path, text).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

/// Write `name` under `dir` as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let path = dir.join(name);
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize {name}: {e}")))?;
    bytes.push(b'\n');
    fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
    Ok(path)
}
