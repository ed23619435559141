use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::readability::flesch;
use crate::evaluation::SentencePrediction;
use crate::features::{Feature, FeatureDataset};
use crate::{Error, Result};

/// Words of this many characters or more share the last bin.
pub const WORD_LENGTH_CAP: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinPoint {
    pub bin: u32,
    pub mean: f64,
    pub count: usize,
}

/// Mean value per bin for one series; empty bins are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinnedCurve {
    pub series: String,
    pub points: Vec<BinPoint>,
}

impl BinnedCurve {
    fn from_sums(series: &str, sums: BTreeMap<u32, (f64, usize)>) -> Self {
        Self {
            series: String::from(series),
            points: sums
                .into_iter()
                .map(|(bin, (sum, count))| BinPoint {
                    bin,
                    mean: sum / count as f64,
                    count,
                })
                .collect(),
        }
    }

    pub fn total_count(&self) -> usize {
        self.points.iter().map(|p| p.count).sum()
    }
}

/// A named set of predictions aligned with a dataset.
pub type SeriesInput<'a> = (&'a str, &'a [SentencePrediction]);

fn check_aligned(d: &FeatureDataset, preds: &[SentencePrediction]) -> Result<()> {
    if preds.len() != d.sentences.len() {
        return Err(Error::LengthMismatch(format!(
            "{} sentences, {} predictions",
            d.sentences.len(),
            preds.len()
        )));
    }
    for (s, p) in d.sentences.iter().zip(preds) {
        if p.values.len() != s.len() || p.mask.len() != s.len() {
            return Err(Error::LengthMismatch(format!("sentence {}", s.sentence_id)));
        }
    }
    Ok(())
}

fn length_bin(word: &str) -> u32 {
    (word.chars().count() as u32).clamp(1, WORD_LENGTH_CAP)
}

/// Mean of `feature` per word length, for the gold values (series `true`)
/// and for each prediction series.
pub fn word_length_curve(d: &FeatureDataset, series: &[SeriesInput<'_>], feature: Feature) -> Result<Vec<BinnedCurve>> {
    let mut gold: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for (word, f) in d.tokens() {
        let e = gold.entry(length_bin(word)).or_default();
        e.0 += f[feature];
        e.1 += 1;
    }
    let mut out = Vec::with_capacity(series.len() + 1);
    out.push(BinnedCurve::from_sums("true", gold));
    for (label, preds) in series {
        check_aligned(d, preds)?;
        let mut sums: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
        for (s, p) in d.sentences.iter().zip(preds.iter()) {
            for ((word, v), ok) in s.words.iter().zip(&p.values).zip(&p.mask) {
                if *ok {
                    let e = sums.entry(length_bin(word)).or_default();
                    e.0 += v[feature];
                    e.1 += 1;
                }
            }
        }
        out.push(BinnedCurve::from_sums(label, sums));
    }
    Ok(out)
}

/// Per-sentence accuracy on `feature` (100 − MAE over the sentence's valid
/// words), averaged within bins of the sentence's readability score. Bins
/// are labelled by their lower edge; a score of exactly 100 joins the top
/// bin.
pub fn readability_accuracy_curve(
    gold: &FeatureDataset,
    predictions: &[SentencePrediction],
    feature: Feature,
    language: &str,
    bin_width: u32,
    series: &str,
) -> Result<BinnedCurve> {
    check_aligned(gold, predictions)?;
    if bin_width == 0 {
        return Err(Error::InvalidConfig(String::from("bin width must be positive")));
    }
    let top = 100u32.div_ceil(bin_width) - 1;
    let mut sums: BTreeMap<u32, (f64, usize)> = BTreeMap::new();
    for (s, p) in gold.sentences.iter().zip(predictions) {
        let score = match flesch(&[&s.words[..]], language) {
            Ok(r) => r.value,
            Err(Error::EmptyCorpus) => continue,
            Err(e) => return Err(e),
        };
        let mut err = 0.0;
        let mut n = 0usize;
        for ((g, v), ok) in s.values.iter().zip(&p.values).zip(&p.mask) {
            if *ok {
                err += libm::fabs(v[feature] - g[feature]);
                n += 1;
            }
        }
        if n == 0 {
            continue;
        }
        let bin = ((libm::floor(score) as u32) / bin_width).min(top) * bin_width;
        let e = sums.entry(bin).or_default();
        e.0 += 100.0 - err / n as f64;
        e.1 += 1;
    }
    Ok(BinnedCurve::from_sums(series, sums))
}
