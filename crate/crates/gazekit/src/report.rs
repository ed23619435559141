//! Summary tables over evaluation reports: models as rows, datasets as
//! columns, cells `mean (std)`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use gazekit_core::evaluation::EvaluationReport;
use gazekit_core::features::FEATURE_ORDER;

use crate::error::{Error, Result};

/// Report files an evaluation directory may hold, in reading order.
pub const REPORT_FILES: [&str; 3] = ["report.json", "baseline.json", "pretrained.json"];

/// Every report found in `dirs`. A directory without any is an error.
pub fn collect_reports(dirs: &[PathBuf]) -> Result<Vec<EvaluationReport>> {
    let mut out = Vec::new();
    for dir in dirs {
        let before = out.len();
        for name in REPORT_FILES {
            let path = dir.join(name);
            if path.exists() {
                out.push(read_report(&path)?);
            }
        }
        if out.len() == before {
            return Err(Error::Data(format!("{}: no evaluation report", dir.display())));
        }
    }
    Ok(out)
}

/// Reads one report, refusing files whose features are not the expected
/// eight in the expected order.
pub fn read_report(path: &Path) -> Result<EvaluationReport> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(Error::json(path))?;
    let names: Vec<&str> = raw
        .get("per_feature")
        .and_then(|v| v.as_object())
        .map(|m| m.keys().map(String::as_str).collect())
        .unwrap_or_default();
    let want: Vec<&str> = FEATURE_ORDER.iter().map(|f| f.name()).collect();
    if names != want {
        return Err(Error::Data(format!(
            "{}: feature order {names:?} is incompatible with {want:?}",
            path.display()
        )));
    }
    serde_json::from_value(raw).map_err(Error::json(path))
}

pub struct SummaryTable {
    pub models: Vec<String>,
    pub datasets: Vec<String>,
    /// `cells[model][dataset]`, `None` where that pair was not run.
    pub cells: Vec<Vec<Option<String>>>,
}

impl SummaryTable {
    /// Rows and columns in first-seen order. A later report for the same
    /// pair replaces an earlier one.
    pub fn build(reports: &[EvaluationReport]) -> Self {
        let mut models: Vec<String> = Vec::new();
        let mut datasets: Vec<String> = Vec::new();
        let mut seen = (BTreeSet::new(), BTreeSet::new());
        let mut values = BTreeMap::new();
        for r in reports {
            if seen.0.insert(r.model.clone()) {
                models.push(r.model.clone());
            }
            if seen.1.insert(r.dataset.clone()) {
                datasets.push(r.dataset.clone());
            }
            values.insert((r.model.clone(), r.dataset.clone()), r.overall.to_string());
        }
        let cells = models
            .iter()
            .map(|m| {
                datasets
                    .iter()
                    .map(|d| values.get(&(m.clone(), d.clone())).cloned())
                    .collect()
            })
            .collect();
        Self {
            models,
            datasets,
            cells,
        }
    }

    /// Aligned plain-text table.
    pub fn to_text(&self) -> String {
        let mut rows = vec![std::iter::once("model".to_string())
            .chain(self.datasets.iter().cloned())
            .collect::<Vec<_>>()];
        for (m, row) in self.models.iter().zip(&self.cells) {
            rows.push(
                std::iter::once(m.clone())
                    .chain(row.iter().map(|c| c.clone().unwrap_or_default()))
                    .collect(),
            );
        }
        let widths: Vec<usize> = (0..rows[0].len())
            .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for r in rows {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(j, (c, w))| if j == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(Error::csv(path))?;
        let header: Vec<&str> = std::iter::once("model")
            .chain(self.datasets.iter().map(String::as_str))
            .collect();
        w.write_record(&header).map_err(Error::csv(path))?;
        for (m, row) in self.models.iter().zip(&self.cells) {
            let record: Vec<&str> = std::iter::once(m.as_str())
                .chain(row.iter().map(|c| c.as_deref().unwrap_or("")))
                .collect();
            w.write_record(&record).map_err(Error::csv(path))?;
        }
        w.flush().map_err(Error::io(path))
    }
}
