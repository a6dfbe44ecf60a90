//! Preference-pair dataset files.
//!
//! The first line is the header `{"schema":"prefpairs/v1"}`; every further
//! line is one pair. Newlines inside code are JSON-escaped, so a record
//! never spans lines.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use mutval_core::PreferencePair;
use thiserror::Error;

use crate::datastore::write_atomic;

pub const PAIRS_SCHEMA: &str = "prefpairs/v1";

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Serializes pairs sorted by (problem_id, pair_type), header first.
pub fn render_pairs(pairs: &[PreferencePair]) -> String {
    let mut sorted: Vec<&PreferencePair> = pairs.iter().collect();
    sorted.sort_by(|a, b| (&a.problem_id, a.pair_type).cmp(&(&b.problem_id, b.pair_type)));
    let mut out = serde_json::json!({ "schema": PAIRS_SCHEMA }).to_string();
    out.push('\n');
    for p in sorted {
        out.push_str(&serde_json::to_string(p).expect("pair serializes"));
        out.push('\n');
    }
    out
}

/// Writes the pairs file atomically and returns the number of records.
pub fn export_pairs(pairs: &[PreferencePair], dest: &Path) -> Result<usize, ExportError> {
    if let Some(parent) = dest.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|source| ExportError::Io {
            path: parent.to_owned(),
            source,
        })?;
    }
    write_atomic(dest, render_pairs(pairs).as_bytes()).map_err(|source| ExportError::Io {
        path: dest.to_owned(),
        source,
    })?;
    Ok(pairs.len())
}

pub fn import_pairs(path: &Path) -> Result<Vec<PreferencePair>, ExportError> {
    let text = fs::read_to_string(path).map_err(|source| ExportError::Io {
        path: path.to_owned(),
        source,
    })?;
    let fmt_err = |line: usize, message: String| ExportError::Format {
        path: path.to_owned(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, l)| l).unwrap_or_default();
    let schema: serde_json::Value =
        serde_json::from_str(header).map_err(|e| fmt_err(1, format!("bad header: {e}")))?;
    if schema.get("schema").and_then(|s| s.as_str()) != Some(PAIRS_SCHEMA) {
        return Err(fmt_err(1, format!("expected schema {PAIRS_SCHEMA}")));
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| serde_json::from_str(l).map_err(|e| fmt_err(k + 1, e.to_string())))
        .collect()
}
