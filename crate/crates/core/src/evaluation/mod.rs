//! Accuracy metrics, baselines and experiment drivers.
//!
//! Accuracy is `100 − MAE` on standardized features. A test set is cut into
//! length-sorted batches, the masked MAE of each batch is computed, batch
//! values are averaged, and runs with different seeds are summarised as
//! mean ± standard deviation.

mod ablation;
mod baseline;
mod cross;
pub mod experiment;
mod metrics;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::de::{Deserializer, Error as _};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::features::{Feature, FeatureDataset, TokenFeatures, FEATURE_ORDER, N_FEATURES};
use crate::{Error, Result};

pub use ablation::{ablation_curve, nested_subsamples, AblationCurve, AblationPoint};
pub use baseline::{mean_baseline, MeanBaseline};
pub use cross::{cross_matrix, CrossMatrix};
pub use metrics::{accuracy, mae_overall, mae_per_feature, BatchTensors, PaddingPolicy};

/// Per-word outputs for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentencePrediction {
    pub values: Vec<TokenFeatures>,
    /// False for words excluded from scoring (e.g. cut by truncation).
    pub mask: Vec<bool>,
    pub truncated_words: usize,
}

/// Anything that maps a sentence to one feature vector per word.
pub trait Predictor {
    fn predict_sentence(&self, words: &[&str]) -> Result<SentencePrediction>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn predict_sentence(&self, words: &[&str]) -> Result<SentencePrediction> {
        (**self).predict_sentence(words)
    }
}

/// Predictions for every sentence of a dataset, in dataset order.
pub fn predict_dataset<P: Predictor>(p: &P, d: &FeatureDataset) -> Result<Vec<SentencePrediction>> {
    d.sentences
        .iter()
        .map(|s| {
            let words: Vec<&str> = s.words.iter().map(String::as_str).collect();
            let pred = p.predict_sentence(&words)?;
            if pred.values.len() != s.len() || pred.mask.len() != s.len() {
                return Err(Error::Shape(format!(
                    "sentence {}: {} words but {} predictions",
                    s.sentence_id,
                    s.len(),
                    pred.values.len()
                )));
            }
            Ok(pred)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub batch_size: usize,
    pub padding: PaddingPolicy,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            batch_size: 16,
            padding: PaddingPolicy::Exclude,
        }
    }
}

/// Sentence indices grouped into batches of similar length.
pub fn length_sorted_batches(d: &FeatureDataset, batch_size: usize) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..d.sentences.len()).collect();
    order.sort_by_key(|&i| (d.sentences[i].len(), i));
    order.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect()
}

/// Batch-averaged MAE of one model run on one dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub overall_mae: f64,
    pub per_feature_mae: [f64; N_FEATURES],
    pub n_batches: usize,
}

impl RunMetrics {
    pub fn accuracy(&self) -> f64 {
        accuracy(self.overall_mae)
    }

    pub fn per_feature_accuracy(&self) -> [f64; N_FEATURES] {
        self.per_feature_mae.map(accuracy)
    }
}

/// Scores precomputed predictions against `d`.
pub fn score_predictions(
    d: &FeatureDataset,
    predictions: &[SentencePrediction],
    opts: EvalOptions,
) -> Result<RunMetrics> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if predictions.len() != d.sentences.len() {
        return Err(Error::Shape(format!(
            "{} sentences, {} predictions",
            d.sentences.len(),
            predictions.len()
        )));
    }
    let mut overall = 0.0;
    let mut per = [0.0; N_FEATURES];
    let mut n_batches = 0usize;
    for batch in length_sorted_batches(d, opts.batch_size) {
        let preds: Vec<Vec<TokenFeatures>> = batch.iter().map(|&i| predictions[i].values.clone()).collect();
        let gold: Vec<Vec<TokenFeatures>> = batch.iter().map(|&i| d.sentences[i].values.clone()).collect();
        let masks: Vec<Vec<bool>> = batch.iter().map(|&i| predictions[i].mask.clone()).collect();
        let tensors = BatchTensors::from_rows(&preds, &gold, &masks)?;
        match mae_overall(&tensors, opts.padding) {
            Ok(m) => overall += m,
            // every word of this batch was truncated away
            Err(Error::AllMasked) => continue,
            Err(e) => return Err(e),
        }
        let pf = mae_per_feature(&tensors, opts.padding)?;
        for (acc, v) in per.iter_mut().zip(pf) {
            *acc += v;
        }
        n_batches += 1;
    }
    if n_batches == 0 {
        return Err(Error::AllMasked);
    }
    let n = n_batches as f64;
    Ok(RunMetrics {
        overall_mae: overall / n,
        per_feature_mae: per.map(|v| v / n),
        n_batches,
    })
}

/// Predicts and scores one run.
pub fn run_metrics<P: Predictor>(p: &P, d: &FeatureDataset, opts: EvalOptions) -> Result<RunMetrics> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    score_predictions(d, &predict_dataset(p, d)?, opts)
}

/// Divisor of the seed-level standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StdKind {
    #[default]
    Population,
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64], kind: StdKind) -> Self {
        if values.is_empty() {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
            };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
        let denom = match kind {
            StdKind::Population => n,
            StdKind::Sample if values.len() > 1 => n - 1.0,
            StdKind::Sample => 1.0,
        };
        Self {
            mean,
            std: libm::sqrt(ss / denom),
        }
    }
}

impl fmt::Display for MeanStd {
    /// Table cell layout, `93.74 (0.05)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ({:.2})", self.mean, self.std)
    }
}

/// One value per feature, serialized as a map keyed by feature name in
/// feature order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerFeature<T>(pub [T; N_FEATURES]);

impl<T> PerFeature<T> {
    pub fn get(&self, f: Feature) -> &T {
        &self.0[f.column()]
    }
}

impl<T: Serialize> Serialize for PerFeature<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(N_FEATURES))?;
        for f in FEATURE_ORDER {
            map.serialize_entry(f.name(), &self.0[f.column()])?;
        }
        map.end()
    }
}

impl<'de, T: Deserialize<'de> + Copy> Deserialize<'de> for PerFeature<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, T>::deserialize(deserializer)?;
        let mut values = Vec::with_capacity(N_FEATURES);
        for f in FEATURE_ORDER {
            values.push(
                *map.get(f.name())
                    .ok_or_else(|| D::Error::custom(format!("missing feature {}", f.name())))?,
            );
        }
        if map.len() != N_FEATURES {
            return Err(D::Error::custom("unexpected feature names"));
        }
        let arr: [T; N_FEATURES] = values
            .try_into()
            .map_err(|_| D::Error::custom("wrong number of features"))?;
        Ok(PerFeature(arr))
    }
}

/// Accuracy of one model on one dataset, summarised over seed runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: String,
    pub dataset: String,
    pub overall: MeanStd,
    pub per_feature: PerFeature<MeanStd>,
    pub n_seeds: usize,
}

impl EvaluationReport {
    pub fn from_runs(model: &str, dataset: &str, runs: &[RunMetrics], kind: StdKind) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::InvalidConfig(String::from("no runs to aggregate")));
        }
        let overall: Vec<f64> = runs.iter().map(RunMetrics::accuracy).collect();
        let per_feature = core::array::from_fn(|g| {
            let col: Vec<f64> = runs.iter().map(|r| accuracy(r.per_feature_mae[g])).collect();
            MeanStd::of(&col, kind)
        });
        Ok(Self {
            model: model.to_string(),
            dataset: dataset.to_string(),
            overall: MeanStd::of(&overall, kind),
            per_feature: PerFeature(per_feature),
            n_seeds: runs.len(),
        })
    }
}

/// Evaluates one predictor per seed run on `test` and aggregates.
pub fn evaluate<P: Predictor>(
    model: &str,
    runs: &[P],
    test: &FeatureDataset,
    opts: EvalOptions,
    kind: StdKind,
) -> Result<EvaluationReport> {
    let metrics = runs
        .iter()
        .map(|p| run_metrics(p, test, opts))
        .collect::<Result<Vec<_>>>()?;
    let dataset = format!("{}/{}", test.provenance.corpus, test.provenance.split);
    EvaluationReport::from_runs(model, &dataset, &metrics, kind)
}
