use alloc::vec;

use serde::{Deserialize, Serialize};

use super::{Predictor, SentencePrediction};
use crate::features::{FeatureDataset, TokenFeatures, N_FEATURES};
use crate::{Error, Result};

/// Predicts the per-feature training mean for every word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanBaseline {
    pub means: TokenFeatures,
}

/// Fits the mean baseline on a (standardized) training set.
pub fn mean_baseline(train: &FeatureDataset) -> Result<MeanBaseline> {
    let n = train.n_tokens();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let mut sums = [0.0; N_FEATURES];
    for (_, f) in train.tokens() {
        for (s, v) in sums.iter_mut().zip(f.0) {
            *s += v;
        }
    }
    Ok(MeanBaseline {
        means: TokenFeatures(sums.map(|s| s / n as f64)),
    })
}

impl Predictor for MeanBaseline {
    fn predict_sentence(&self, words: &[&str]) -> Result<SentencePrediction> {
        Ok(SentencePrediction {
            values: vec![self.means; words.len()],
            mask: vec![true; words.len()],
            truncated_words: 0,
        })
    }
}
