use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{MeanStd, StdKind};
use crate::{Error, Result};

/// Training-set subsamples for each fraction, nested so that every smaller
/// sample is contained in every larger one. Indices within a sample keep
/// their original order; fraction 1.0 yields `0..n_train` exactly.
pub fn nested_subsamples(n_train: usize, fractions: &[f64], seed: u64) -> Result<Vec<Vec<usize>>> {
    check_fractions(fractions)?;
    let mut order: Vec<usize> = (0..n_train).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    fractions
        .iter()
        .map(|&f| {
            let k = libm::ceil(f * n_train as f64) as usize;
            if k == 0 {
                return Err(Error::EmptyFraction(f));
            }
            let mut sample = order[..k.min(n_train)].to_vec();
            sample.sort_unstable();
            Ok(sample)
        })
        .collect()
}

fn check_fractions(fractions: &[f64]) -> Result<()> {
    if fractions.is_empty() {
        return Err(Error::InvalidFractions(String::from("empty grid")));
    }
    if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        return Err(Error::InvalidFractions(format!("{f} is outside (0, 1]")));
    }
    if fractions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidFractions(format!(
            "{fractions:?} is not strictly increasing"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationPoint {
    pub fraction: f64,
    pub n_sentences: usize,
    pub accuracy: MeanStd,
    /// Accuracy of each seed run, in seed order.
    pub runs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationCurve {
    pub points: Vec<AblationPoint>,
    /// Accuracy without any fine-tuning, drawn as a horizontal reference.
    pub pretrained: Option<MeanStd>,
}

/// Runs `train_and_score(sample, seed)` for every fraction and seed and
/// collects the accuracies. `train_and_score` receives training-set
/// indices from [`nested_subsamples`].
pub fn ablation_curve<F>(
    n_train: usize,
    fractions: &[f64],
    subsample_seed: u64,
    seeds: &[u64],
    kind: StdKind,
    mut train_and_score: F,
) -> Result<AblationCurve>
where
    F: FnMut(&[usize], u64) -> Result<f64>,
{
    if seeds.is_empty() {
        return Err(Error::InvalidConfig(String::from("no seeds")));
    }
    let samples = nested_subsamples(n_train, fractions, subsample_seed)?;
    let mut points = Vec::with_capacity(samples.len());
    for (&fraction, sample) in fractions.iter().zip(&samples) {
        let runs = seeds
            .iter()
            .map(|&s| train_and_score(sample, s))
            .collect::<Result<Vec<f64>>>()?;
        points.push(AblationPoint {
            fraction,
            n_sentences: sample.len(),
            accuracy: MeanStd::of(&runs, kind),
            runs,
        });
    }
    Ok(AblationCurve {
        points,
        pretrained: None,
    })
}
