//! End-to-end drivers: split, extract, scale, fine-tune over seeds, score.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{ablation_curve, run_metrics, AblationCurve, MeanStd, RunMetrics, StdKind};
use crate::corpus::{split_dataset, Corpus, SplitRatios};
use crate::features::{extract_features, Averaging, FeatureDataset, Standardizer};
use crate::regression::{
    build_regressor, train, EncoderSpec, TinyTransformer, TokenRegressor, TrainConfig, TrainingHistory,
};
use crate::Result;

/// Data the standardizer is fitted on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitScope {
    #[default]
    Train,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataOptions {
    pub ratios: SplitRatios,
    pub split_seed: u64,
    pub averaging: Averaging,
    pub fit_scope: FitScope,
}

impl Default for DataOptions {
    fn default() -> Self {
        Self {
            ratios: SplitRatios::default(),
            split_seed: 0,
            averaging: Averaging::AllSubjects,
            fit_scope: FitScope::Train,
        }
    }
}

/// Standardized train/validation/test features and the fitted scaler.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub standardizer: Standardizer,
    pub train: FeatureDataset,
    pub val: FeatureDataset,
    pub test: FeatureDataset,
}

pub fn prepare_data(c: &Corpus, opts: &DataOptions) -> Result<PreparedData> {
    let (train, val, test) = split_dataset(c, opts.ratios, opts.split_seed)?;
    let train = extract_features(&train, opts.averaging)?;
    let val = extract_features(&val, opts.averaging)?;
    let test = extract_features(&test, opts.averaging)?;
    let standardizer = match opts.fit_scope {
        FitScope::Train => Standardizer::fit(&train)?,
        FitScope::All => {
            let mut all = train.clone();
            all.sentences.extend(val.sentences.iter().cloned());
            all.sentences.extend(test.sentences.iter().cloned());
            Standardizer::fit(&all)?
        }
    };
    Ok(PreparedData {
        train: standardizer.standardize(&train),
        val: standardizer.standardize(&val),
        test: standardizer.standardize(&test),
        standardizer,
    })
}

/// One fine-tuning run and its test-set score.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    pub model: TokenRegressor<TinyTransformer>,
    pub history: TrainingHistory,
    pub test: RunMetrics,
}

/// Builds a fresh regressor (head seeded by `seed`), fine-tunes it on
/// `train` and scores it on `data.test`.
pub fn fine_tune(
    spec: &EncoderSpec,
    data: &PreparedData,
    train_set: &FeatureDataset,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<SeedRun> {
    let model = build_regressor(spec, seed)?;
    let (model, history) = train(model, train_set, &data.val, cfg, seed)?;
    let test = run_metrics(&model, &data.test, cfg.eval_options())?;
    Ok(SeedRun {
        seed,
        model,
        history,
        test,
    })
}

/// One [`fine_tune`] run per configured seed on the full training split.
pub fn run_seeds(spec: &EncoderSpec, data: &PreparedData, cfg: &TrainConfig) -> Result<Vec<SeedRun>> {
    cfg.seeds
        .iter()
        .map(|&seed| fine_tune(spec, data, &data.train, cfg, seed))
        .collect()
}

/// Accuracy as a function of the amount of training data. Validation and
/// test splits stay fixed; training subsamples are nested. The curve also
/// carries the accuracy of the same encoder without fine-tuning.
pub fn ablation_run(
    spec: &EncoderSpec,
    data: &PreparedData,
    fractions: &[f64],
    cfg: &TrainConfig,
    subsample_seed: u64,
    kind: StdKind,
) -> Result<AblationCurve> {
    let mut curve = ablation_curve(
        data.train.sentences.len(),
        fractions,
        subsample_seed,
        &cfg.seeds,
        kind,
        |sample, seed| {
            let subset = data.train.select(sample);
            Ok(fine_tune(spec, data, &subset, cfg, seed)?.test.accuracy())
        },
    )?;
    let frozen = TrainConfig {
        trainable: false,
        ..cfg.clone()
    };
    let pretrained = cfg
        .seeds
        .iter()
        .map(|&seed| Ok(fine_tune(spec, data, &data.train, &frozen, seed)?.test.accuracy()))
        .collect::<Result<Vec<f64>>>()?;
    curve.pretrained = Some(MeanStd::of(&pretrained, kind));
    Ok(curve)
}
