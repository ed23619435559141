//! Masked mean absolute error over padded `B × L × G` batches.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::features::{TokenFeatures, N_FEATURES};
use crate::{Error, Result};

/// Treatment of padded positions in the MAE denominator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaddingPolicy {
    /// Only real tokens count.
    #[default]
    Exclude,
    /// Padded cells count as zero-error cells, so the divisor is the full
    /// `B·L·G` (or `B·L` per feature).
    Include,
}

/// Predictions and targets for `batch` sentences padded to `len` words.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchTensors {
    pub batch: usize,
    pub len: usize,
    /// `batch × len × 8`, row-major.
    pub predictions: Vec<f64>,
    pub targets: Vec<f64>,
    /// `batch × len`; false at padding.
    pub mask: Vec<bool>,
}

impl BatchTensors {
    pub fn zeros(batch: usize, len: usize) -> Self {
        Self {
            batch,
            len,
            predictions: alloc::vec![0.0; batch * len * N_FEATURES],
            targets: alloc::vec![0.0; batch * len * N_FEATURES],
            mask: alloc::vec![false; batch * len],
        }
    }

    /// Packs ragged rows; rows shorter than the longest are padded.
    pub fn from_rows(
        predictions: &[Vec<TokenFeatures>],
        targets: &[Vec<TokenFeatures>],
        masks: &[Vec<bool>],
    ) -> Result<Self> {
        if predictions.len() != targets.len() || targets.len() != masks.len() {
            return Err(Error::Shape(format!(
                "{} prediction rows, {} target rows, {} mask rows",
                predictions.len(),
                targets.len(),
                masks.len()
            )));
        }
        let len = targets.iter().map(Vec::len).max().unwrap_or(0);
        let mut b = Self::zeros(targets.len(), len);
        for (i, ((p, t), m)) in predictions.iter().zip(targets).zip(masks).enumerate() {
            if p.len() != t.len() || m.len() != t.len() {
                return Err(Error::Shape(format!(
                    "row {i}: lengths {} / {} / {}",
                    p.len(),
                    t.len(),
                    m.len()
                )));
            }
            for l in 0..t.len() {
                let at = (i * len + l) * N_FEATURES;
                b.predictions[at..at + N_FEATURES].copy_from_slice(&p[l].0);
                b.targets[at..at + N_FEATURES].copy_from_slice(&t[l].0);
                b.mask[i * len + l] = m[l];
            }
        }
        Ok(b)
    }

    fn check(&self) -> Result<usize> {
        let cells = self.batch * self.len;
        if self.predictions.len() != cells * N_FEATURES
            || self.targets.len() != cells * N_FEATURES
            || self.mask.len() != cells
        {
            return Err(Error::Shape(format!(
                "batch {}×{} with {} predictions, {} targets, {} mask entries",
                self.batch,
                self.len,
                self.predictions.len(),
                self.targets.len(),
                self.mask.len()
            )));
        }
        let valid = self.mask.iter().filter(|m| **m).count();
        if valid == 0 {
            return Err(Error::AllMasked);
        }
        Ok(valid)
    }
}

/// MAE over every (position, feature) cell of the batch.
pub fn mae_overall(b: &BatchTensors, policy: PaddingPolicy) -> Result<f64> {
    let valid = b.check()?;
    let mut sum = 0.0;
    for (cell, _) in b.mask.iter().enumerate().filter(|(_, m)| **m) {
        let at = cell * N_FEATURES;
        for g in 0..N_FEATURES {
            sum += libm::fabs(b.predictions[at + g] - b.targets[at + g]);
        }
    }
    let denom = match policy {
        PaddingPolicy::Exclude => valid,
        PaddingPolicy::Include => b.batch * b.len,
    };
    Ok(sum / (denom * N_FEATURES) as f64)
}

/// MAE of each feature column over the batch positions.
pub fn mae_per_feature(b: &BatchTensors, policy: PaddingPolicy) -> Result<[f64; N_FEATURES]> {
    let valid = b.check()?;
    let mut sums = [0.0; N_FEATURES];
    for (cell, _) in b.mask.iter().enumerate().filter(|(_, m)| **m) {
        let at = cell * N_FEATURES;
        for (g, s) in sums.iter_mut().enumerate() {
            *s += libm::fabs(b.predictions[at + g] - b.targets[at + g]);
        }
    }
    let denom = match policy {
        PaddingPolicy::Exclude => valid,
        PaddingPolicy::Include => b.batch * b.len,
    } as f64;
    Ok(sums.map(|s| s / denom))
}

/// Prediction accuracy on the 0–100 scale.
pub fn accuracy(mae: f64) -> f64 {
    100.0 - mae
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn perfect_predictions() {
        let row = vec![TokenFeatures([3.0; 8]); 4];
        let b = BatchTensors::from_rows(
            core::slice::from_ref(&row),
            core::slice::from_ref(&row),
            &[vec![true; 4]],
        )
        .unwrap();
        assert_eq!(mae_overall(&b, PaddingPolicy::Exclude).unwrap(), 0.0);
        assert_eq!(accuracy(0.0), 100.0);
    }

    #[test]
    fn constant_error_of_three() {
        let p = vec![TokenFeatures([3.0; 8]); 2];
        let t = vec![TokenFeatures([0.0; 8]); 2];
        let b = BatchTensors::from_rows(&[p], &[t], &[vec![true; 2]]).unwrap();
        assert_eq!(mae_overall(&b, PaddingPolicy::Exclude).unwrap(), 3.0);
    }

    #[test]
    fn error_in_first_feature_only() {
        let mut p = TokenFeatures::default();
        p.0[0] = 4.0;
        let b = BatchTensors::from_rows(&[vec![p]], &[vec![TokenFeatures::default()]], &[vec![true]]).unwrap();
        let per = mae_per_feature(&b, PaddingPolicy::Exclude).unwrap();
        assert_eq!(per[0], 4.0);
        assert!(per[1..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn padding_policies() {
        let long = vec![TokenFeatures([2.0; 8]); 3];
        let short = vec![TokenFeatures([2.0; 8])];
        let zeros3 = vec![TokenFeatures::default(); 3];
        let zeros1 = vec![TokenFeatures::default()];
        let b = BatchTensors::from_rows(&[long, short], &[zeros3, zeros1], &[vec![true; 3], vec![true]]).unwrap();
        assert_eq!(b.len, 3);
        assert_eq!(mae_overall(&b, PaddingPolicy::Exclude).unwrap(), 2.0);
        // 4 real cells of 6
        assert!((mae_overall(&b, PaddingPolicy::Include).unwrap() - 2.0 * 4.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn all_masked_errors() {
        let b = BatchTensors::zeros(2, 2);
        assert_eq!(mae_overall(&b, PaddingPolicy::Exclude), Err(Error::AllMasked));
        let mut bad = BatchTensors::zeros(1, 1);
        bad.mask[0] = true;
        bad.targets.pop();
        assert!(matches!(
            mae_per_feature(&bad, PaddingPolicy::Exclude),
            Err(Error::Shape(_))
        ));
    }
}
