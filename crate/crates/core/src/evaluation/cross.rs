use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{run_metrics, EvalOptions, Predictor};
use crate::features::FeatureDataset;
use crate::{Error, Result};

/// Transfer errors between fine-tuning sources (rows) and test sets
/// (columns). `deltas[a][b] = errors[a][b] − errors[b][b]`: how much worse
/// the model tuned on `a` does on `b` than the in-domain model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossMatrix {
    pub labels: Vec<String>,
    /// Seed-averaged overall MAE.
    pub errors: Vec<Vec<f64>>,
    pub deltas: Vec<Vec<f64>>,
}

impl CrossMatrix {
    /// Builds the matrix from a square table of errors in label order.
    pub fn from_errors(labels: Vec<String>, errors: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if errors.len() != n || errors.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("{n} labels but a non-square error table")));
        }
        let deltas = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| if a == b { 0.0 } else { errors[a][b] - errors[b][b] })
                    .collect()
            })
            .collect();
        Ok(Self { labels, errors, deltas })
    }

    pub fn delta(&self, source: &str, target: &str) -> Option<f64> {
        let a = self.labels.iter().position(|l| l == source)?;
        let b = self.labels.iter().position(|l| l == target)?;
        Some(self.deltas[a][b])
    }
}

/// Evaluates every source's seed runs on every test split. Labels are the
/// sorted keys, so the result does not depend on insertion order. Each test
/// split must already be scaled with its own dataset's training standardizer.
pub fn cross_matrix<P: Predictor>(
    runs: &BTreeMap<String, Vec<P>>,
    tests: &BTreeMap<String, FeatureDataset>,
    opts: EvalOptions,
) -> Result<CrossMatrix> {
    for label in runs.keys() {
        if !tests.contains_key(label) {
            return Err(Error::MissingPair(format!("no test split for source {label}")));
        }
    }
    for label in tests.keys() {
        if !runs.contains_key(label) {
            return Err(Error::MissingPair(format!("no in-domain model for test set {label}")));
        }
    }
    let labels: Vec<String> = runs.keys().cloned().collect();
    let mut errors = Vec::with_capacity(labels.len());
    for source in &labels {
        let models = &runs[source];
        if models.is_empty() {
            return Err(Error::MissingPair(format!("source {source} has no runs")));
        }
        let mut row = Vec::with_capacity(labels.len());
        for target in &labels {
            let mut sum = 0.0;
            for m in models {
                sum += run_metrics(m, &tests[target], opts)?.overall_mae;
            }
            row.push(sum / models.len() as f64);
        }
        errors.push(row);
    }
    CrossMatrix::from_errors(labels, errors)
}
