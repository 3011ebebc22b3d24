//! Result documents and atomic file output.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::CliError;

/// Document written by `parfam fit`.
///
/// Wall time is reported on stderr only so that equal seeds give
/// byte-identical documents. Non-finite scores serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub expression: String,
    pub r2_train: Option<f64>,
    pub r2_val: Option<f64>,
    pub r2_test: Option<f64>,
    pub n_nonzero: usize,
    pub complexity: usize,
    pub spec_used: String,
    pub spec_index: usize,
    pub specs_fitted: usize,
    pub specs_total: usize,
    pub early_stopped: bool,
    pub budget_exhausted: bool,
    pub seed: u64,
    pub eval_count: u64,
}

pub(crate) fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl FitResult {
    pub fn to_document(&self) -> String {
        to_document(self)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_document<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

/// Writes `contents` to a temporary file next to `path`, then renames it
/// into place so readers never observe a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CliError::input(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
