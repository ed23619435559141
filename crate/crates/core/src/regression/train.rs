use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encoder::SequenceEncoder;
use super::model::{EncoderSpec, TokenRegressor};
use super::params::{clip_global_norm, AdamW, LinearDecay, ParamSet};
use crate::evaluation::{run_metrics, EvalOptions, PaddingPolicy};
use crate::features::{FeatureDataset, N_FEATURES};
use crate::{Error, Result};

pub const DEFAULT_SEEDS: [u64; 5] = [12, 79, 237, 549, 886];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Loss {
    /// Squared error averaged over valid words and all eight features.
    #[default]
    Mse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub grad_clip: f64,
    pub batch_size: usize,
    pub seeds: Vec<u64>,
    pub loss: Loss,
    /// False evaluates the pretrained encoder with an untrained head.
    pub trainable: bool,
    /// False keeps the encoder fixed and trains only the head.
    pub train_encoder: bool,
    pub eval_batch_size: usize,
    pub padding: PaddingPolicy,
    /// Keep a record per optimizer step in the history.
    pub record_steps: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 5e-5,
            weight_decay: 0.01,
            max_epochs: 100,
            patience: 7,
            grad_clip: 1.0,
            batch_size: 16,
            seeds: DEFAULT_SEEDS.to_vec(),
            loss: Loss::Mse,
            trainable: true,
            train_encoder: true,
            eval_batch_size: 16,
            padding: PaddingPolicy::Exclude,
            record_steps: false,
        }
    }
}

impl TrainConfig {
    /// Defaults with the encoder's fine-tuning batch size.
    pub fn for_encoder(spec: &EncoderSpec) -> Self {
        Self {
            batch_size: spec.default_batch_size(),
            ..Self::default()
        }
    }

    pub fn check(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if !(self.weight_decay.is_finite() && self.weight_decay >= 0.0) {
            return bad(format!("weight_decay {} must be non-negative", self.weight_decay));
        }
        if self.patience >= self.max_epochs {
            return bad(format!(
                "patience {} must be below max_epochs {}",
                self.patience, self.max_epochs
            ));
        }
        if self.grad_clip.is_nan() || self.grad_clip <= 0.0 {
            return bad(format!("grad_clip {} must be positive", self.grad_clip));
        }
        if self.batch_size == 0 || self.eval_batch_size == 0 {
            return bad(String::from("batch sizes must be positive"));
        }
        if self.seeds.is_empty() {
            return bad(String::from("seeds must be non-empty"));
        }
        Ok(())
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            batch_size: self.eval_batch_size,
            padding: self.padding,
        }
    }
}

/// Patience counter on a score that should increase. Ties do not count as
/// improvement.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::NEG_INFINITY,
            best_epoch: 0,
            stale: 0,
        }
    }

    /// Records an epoch's score; returns true when it is a new best.
    pub fn observe(&mut self, epoch: usize, score: f64) -> bool {
        if score > self.best {
            self.best = score;
            self.best_epoch = epoch;
            self.stale = 0;
            true
        } else {
            self.stale += 1;
            false
        }
    }

    pub fn should_stop(&self) -> bool {
        self.stale >= self.patience
    }

    pub fn best(&self) -> (usize, f64) {
        (self.best_epoch, self.best)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean training loss over the epoch's steps; NaN for the frozen pass.
    pub train_loss: f64,
    pub val_accuracy: f64,
    /// Learning rate of the last step of the epoch.
    pub lr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub lr: f64,
    pub loss: f64,
    pub grad_norm: f64,
    pub clipped_norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochRecord>,
    pub steps: Vec<StepRecord>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub total_steps: usize,
    pub stopped_early: bool,
}

/// Fine-tunes `model` on standardized `train` data, selecting the epoch
/// with the best validation accuracy.
///
/// Each epoch visits the training sentences in a seeded random order, in
/// batches of `cfg.batch_size`. Per step: MSE gradient over the first-piece
/// outputs of valid words, global-norm clipping, linearly decayed learning
/// rate and an AdamW update. Training stops at `max_epochs` or after
/// `patience` epochs without a strictly better validation accuracy, and the
/// best epoch's parameters are returned.
///
/// With `cfg.trainable == false` no update is made and the history holds a
/// single validation pass (epoch 0).
pub fn train<E: SequenceEncoder>(
    mut model: TokenRegressor<E>,
    train: &FeatureDataset,
    val: &FeatureDataset,
    cfg: &TrainConfig,
    seed: u64,
) -> Result<(TokenRegressor<E>, TrainingHistory)> {
    cfg.check()?;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let eval = cfg.eval_options();
    let mut history = TrainingHistory::default();

    if !cfg.trainable {
        let acc = run_metrics(&model, val, eval)?.accuracy();
        history.epochs.push(EpochRecord {
            epoch: 0,
            train_loss: f64::NAN,
            val_accuracy: acc,
            lr: 0.0,
        });
        history.best_val_accuracy = acc;
        return Ok((model, history));
    }

    let words: Vec<Vec<&str>> = train
        .sentences
        .iter()
        .map(|s| s.words.iter().map(String::as_str).collect())
        .collect();
    let steps_per_epoch = train.sentences.len().div_ceil(cfg.batch_size);
    let schedule = LinearDecay {
        base: cfg.learning_rate,
        total_steps: steps_per_epoch * cfg.max_epochs,
    };
    history.total_steps = schedule.total_steps;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut optimizer = AdamW::new(model.params(), cfg.weight_decay);
    let mut grads = model.params().zeros_like();
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best: ParamSet = model.params().clone();
    let mut order: Vec<usize> = (0..train.sentences.len()).collect();
    let mut step = 0usize;

    for epoch in 1..=cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut n_steps = 0usize;
        let mut lr = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            grads.fill_zero();
            let mut sum_sq = 0.0;
            let mut n_valid = 0usize;
            for &i in batch {
                let (s, n) =
                    model.accumulate_gradients(&words[i], &train.sentences[i].values, &mut grads, cfg.train_encoder)?;
                sum_sq += s;
                n_valid += n;
            }
            lr = schedule.at(step);
            if n_valid > 0 {
                let denom = (n_valid * N_FEATURES) as f64;
                let loss = sum_sq / denom;
                if !loss.is_finite() {
                    return Err(Error::NonFiniteLoss { epoch, step });
                }
                grads.scale(1.0 / denom);
                if !cfg.train_encoder {
                    let head = model.head_weight_slot();
                    for t in &mut grads.tensors[..head] {
                        t.data.fill(0.0);
                    }
                }
                let grad_norm = clip_global_norm(&mut grads, cfg.grad_clip);
                optimizer.step(model.params_mut(), &grads, lr);
                if cfg.record_steps {
                    history.steps.push(StepRecord {
                        step,
                        lr,
                        loss,
                        grad_norm,
                        clipped_norm: grads.global_norm(),
                    });
                }
                loss_sum += loss;
                n_steps += 1;
            }
            step += 1;
        }

        let val_accuracy = run_metrics(&model, val, eval)?.accuracy();
        history.epochs.push(EpochRecord {
            epoch,
            train_loss: if n_steps > 0 {
                loss_sum / n_steps as f64
            } else {
                f64::NAN
            },
            val_accuracy,
            lr,
        });
        if stopper.observe(epoch, val_accuracy) {
            best.clone_from(model.params());
        }
        if stopper.should_stop() {
            history.stopped_early = epoch < cfg.max_epochs;
            break;
        }
    }

    let (best_epoch, best_acc) = stopper.best();
    history.best_epoch = best_epoch;
    history.best_val_accuracy = best_acc;
    model.load_params(best)?;
    Ok((model, history))
}

/// Training loss of `model` over a whole dataset (mean over valid words and
/// features).
pub fn mse_loss<E: SequenceEncoder>(model: &TokenRegressor<E>, data: &FeatureDataset) -> Result<f64> {
    let mut grads = model.params().zeros_like();
    let mut sum = 0.0;
    let mut n = 0usize;
    for s in &data.sentences {
        let words: Vec<&str> = s.words.iter().map(String::as_str).collect();
        let (ss, nv) = model.accumulate_gradients(&words, &s.values, &mut grads, false)?;
        sum += ss;
        n += nv;
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(sum / (n * N_FEATURES) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn default_recipe() {
        let c = TrainConfig::default();
        assert_eq!(
            (c.learning_rate, c.weight_decay, c.max_epochs, c.patience, c.grad_clip),
            (5e-5, 0.01, 100, 7, 1.0)
        );
        assert_eq!(c.seeds, [12, 79, 237, 549, 886]);
        assert!(c.check().is_ok());
    }

    #[test]
    fn config_checks() {
        let bad = [
            TrainConfig {
                patience: 100,
                ..TrainConfig::default()
            },
            TrainConfig {
                learning_rate: 0.0,
                ..TrainConfig::default()
            },
            TrainConfig {
                seeds: vec![],
                ..TrainConfig::default()
            },
            TrainConfig {
                batch_size: 0,
                ..TrainConfig::default()
            },
        ];
        assert!(bad.iter().all(|c| c.check().is_err()));
    }

    #[test]
    fn early_stopping_counts_ties_as_stale() {
        let mut s = EarlyStopping::new(2);
        assert!(s.observe(1, 50.0));
        assert!(!s.observe(2, 50.0));
        assert!(!s.should_stop());
        assert!(!s.observe(3, 49.0));
        assert!(s.should_stop());
        assert_eq!(s.best(), (1, 50.0));
    }

    #[test]
    fn improvement_resets_patience() {
        let mut s = EarlyStopping::new(2);
        s.observe(1, 1.0);
        s.observe(2, 0.5);
        assert!(s.observe(3, 2.0));
        s.observe(4, 1.0);
        assert!(!s.should_stop());
    }
}
