//! Writing reports to disk.

use std::path::Path;

use super::report::ExperimentReport;
use crate::error::{Error, Result};

impl ExperimentReport {
    /// Pretty JSON; keys follow the struct field order, maps are sorted.
    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    /// The convergence table as CSV; a header only when the scenario has no table.
    pub fn csv_string(&self) -> Result<String> {
        match &self.table {
            Some(t) => t.csv_string().and_then(|s| if s.is_empty() { header_only() } else { Ok(s) }),
            None => header_only(),
        }
    }
}

fn header_only() -> Result<String> {
    Ok("k,epsilon,pairing_re,pairing_im,target_re,target_im,gap_abs\n".to_string())
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the JSON report and the CSV table to whichever paths are given.
pub fn emit_outputs(report: &ExperimentReport, json_path: Option<&Path>, csv_path: Option<&Path>) -> Result<()> {
    if let Some(p) = json_path {
        let mut text = report.to_json_string()?;
        text.push('\n');
        write(p, &text)?;
    }
    if let Some(p) = csv_path {
        write(p, &report.csv_string()?)?;
    }
    Ok(())
}
