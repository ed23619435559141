use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::encoder::{DeskConfig, SequenceEncoder, TinyTransformer};
use super::linalg::{acc_a_bt, acc_at_b, acc_col_sum, affine};
use super::params::{ParamSet, Tensor};
use super::tokenize::{align_subwords, Piece, SubwordAlignment, SEP_ID};
use crate::evaluation::{Predictor, SentencePrediction};
use crate::features::{TokenFeatures, N_FEATURES};
use crate::{Error, Result};

/// A published checkpoint with its hidden size and fine-tuning batch size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelCard {
    pub alias: &'static str,
    pub checkpoint: &'static str,
    pub languages: &'static str,
    pub hidden_size: usize,
    pub batch_size: usize,
}

pub const MODEL_CARDS: [ModelCard; 9] = [
    ModelCard {
        alias: "bert-nl",
        checkpoint: "wietsedv/bert-base-dutch-cased",
        languages: "nl",
        hidden_size: 768,
        batch_size: 16,
    },
    ModelCard {
        alias: "bert-en",
        checkpoint: "bert-base-uncased",
        languages: "en",
        hidden_size: 768,
        batch_size: 16,
    },
    ModelCard {
        alias: "bert-de",
        checkpoint: "bert-base-german-cased",
        languages: "de",
        hidden_size: 768,
        batch_size: 8,
    },
    ModelCard {
        alias: "bert-ru",
        checkpoint: "DeepPavlov/rubert-base-cased",
        languages: "ru",
        hidden_size: 768,
        batch_size: 8,
    },
    ModelCard {
        alias: "bert-multi",
        checkpoint: "bert-base-multilingual-cased",
        languages: "104 languages",
        hidden_size: 768,
        batch_size: 16,
    },
    ModelCard {
        alias: "xlm-en",
        checkpoint: "xlm-mlm-en-2048",
        languages: "en",
        hidden_size: 2048,
        batch_size: 2,
    },
    ModelCard {
        alias: "xlm-ende",
        checkpoint: "xlm-mlm-ende-1024",
        languages: "en+de",
        hidden_size: 1024,
        batch_size: 8,
    },
    ModelCard {
        alias: "xlm-17",
        checkpoint: "xlm-mlm-17-1280",
        languages: "17 languages",
        hidden_size: 1280,
        batch_size: 8,
    },
    ModelCard {
        alias: "xlm-100",
        checkpoint: "xlm-mlm-100-1280",
        languages: "100 languages",
        hidden_size: 1280,
        batch_size: 8,
    },
];

/// Fine-tuning batch size for the desk-scale encoder.
pub const DESK_BATCH_SIZE: usize = 1;

/// Which encoder a regressor is built on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EncoderSpec {
    Desk(DeskConfig),
    Checkpoint {
        alias: String,
        checkpoint: String,
        hidden_size: usize,
    },
}

impl EncoderSpec {
    /// `desk` (or `tiny`) for the built-in encoder, otherwise a model alias
    /// or checkpoint identifier from [`MODEL_CARDS`].
    pub fn resolve(id: &str) -> Result<Self> {
        if id == "desk" || id == "tiny" {
            return Ok(EncoderSpec::Desk(DeskConfig::default()));
        }
        MODEL_CARDS
            .iter()
            .find(|c| c.alias == id || c.checkpoint == id)
            .map(|c| EncoderSpec::Checkpoint {
                alias: String::from(c.alias),
                checkpoint: String::from(c.checkpoint),
                hidden_size: c.hidden_size,
            })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown encoder {id:?}")))
    }

    pub fn id(&self) -> String {
        match self {
            EncoderSpec::Desk(c) => format!("desk-{}x{}", c.layers, c.hidden),
            EncoderSpec::Checkpoint { alias, .. } => alias.clone(),
        }
    }

    pub fn hidden_size(&self) -> usize {
        match self {
            EncoderSpec::Desk(c) => c.hidden,
            EncoderSpec::Checkpoint { hidden_size, .. } => *hidden_size,
        }
    }

    pub fn default_batch_size(&self) -> usize {
        match self {
            EncoderSpec::Desk(_) => DESK_BATCH_SIZE,
            EncoderSpec::Checkpoint { alias, .. } => MODEL_CARDS
                .iter()
                .find(|c| c.alias == alias)
                .map_or(8, |c| c.batch_size),
        }
    }
}

/// Builds the regressor for `spec` with a head initialised from `head_seed`.
/// Only the desk-scale encoder ships with weights; checkpoints need an
/// external backend.
pub fn build_regressor(spec: &EncoderSpec, head_seed: u64) -> Result<TokenRegressor<TinyTransformer>> {
    match spec {
        EncoderSpec::Desk(config) => Ok(TokenRegressor::new(TinyTransformer::new(*config)?, head_seed)),
        EncoderSpec::Checkpoint { checkpoint, .. } => Err(Error::UnresolvableCheckpoint(checkpoint.clone())),
    }
}

/// Encoder followed by one affine map `hidden → 8` shared by all positions.
/// Each word is read off its first subword piece.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenRegressor<E: SequenceEncoder = TinyTransformer> {
    encoder: E,
    params: ParamSet,
}

/// A sentence ready for the encoder.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub pieces: Vec<Piece>,
    pub alignment: SubwordAlignment,
    /// Words whose first piece survived truncation.
    pub valid: Vec<bool>,
}

impl Prepared {
    pub fn truncated_words(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }
}

impl<E: SequenceEncoder> TokenRegressor<E> {
    pub fn new(encoder: E, head_seed: u64) -> Self {
        let mut params = ParamSet::new();
        encoder.init_params(&mut params);
        let hidden = encoder.hidden_size();
        params.push(Tensor::zeros("head.weight", hidden, N_FEATURES, true));
        params.push(Tensor::zeros("head.bias", N_FEATURES, 1, false));
        let mut model = Self { encoder, params };
        model.reset_head(head_seed);
        model
    }

    /// Uniform fan-in initialisation of the head weights, zero bias.
    pub fn reset_head(&mut self, seed: u64) {
        let hidden = self.encoder.hidden_size();
        let bound = 1.0 / libm::sqrt(hidden as f64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (w, b) = (self.head_weight_slot(), self.head_bias_slot());
        for v in self.params.get_mut(w) {
            *v = rng.random_range(-bound..bound);
        }
        self.params.get_mut(b).fill(0.0);
    }

    pub fn encoder(&self) -> &E {
        &self.encoder
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParamSet {
        &mut self.params
    }

    /// Replaces all parameters; the layout must match.
    pub fn load_params(&mut self, params: ParamSet) -> Result<()> {
        let head = &params.tensors.get(self.head_weight_slot());
        if let Some(h) = head {
            if h.rows != self.encoder.hidden_size() {
                return Err(Error::HiddenSizeMismatch {
                    expected: h.rows,
                    actual: self.encoder.hidden_size(),
                });
            }
        }
        if !self.params.same_layout(&params) {
            return Err(Error::ParamLayout(String::from("tensor names or shapes differ")));
        }
        self.params = params;
        Ok(())
    }

    pub fn head_weight_slot(&self) -> usize {
        self.encoder.n_tensors()
    }

    pub fn head_bias_slot(&self) -> usize {
        self.encoder.n_tensors() + 1
    }

    /// `(input, output)` dimensions of the regression head.
    pub fn head_shape(&self) -> (usize, usize) {
        let t = &self.params.tensors[self.head_weight_slot()];
        (t.rows, t.cols)
    }

    /// Tokenizes, aligns and truncates to the encoder's limit. Words whose
    /// first piece falls past the limit are marked invalid.
    pub fn prepare(&self, words: &[&str]) -> Result<Prepared> {
        let mut pieces = self.encoder.encode_words(words);
        let alignment = align_subwords(words.len(), &pieces)?;
        let limit = self.encoder.max_pieces();
        if pieces.len() > limit {
            pieces.truncate(limit - 1);
            pieces.push(Piece {
                text: String::from("[SEP]"),
                id: SEP_ID,
                word: None,
                word_chars: 0,
            });
        }
        let valid = alignment.first_piece.iter().map(|&p| p < limit - 1).collect();
        Ok(Prepared {
            pieces,
            alignment,
            valid,
        })
    }

    /// Per-word outputs (`words × 8`, invalid words zeroed), the encoder cache
    /// and the hidden states.
    fn forward(&self, prepared: &Prepared) -> (Vec<f64>, E::Cache, Vec<f64>) {
        let d = self.encoder.hidden_size();
        let (hidden, cache) = self.encoder.forward(&self.params, &prepared.pieces);
        let n_words = prepared.valid.len();
        let mut out = vec![0.0; n_words * N_FEATURES];
        let mut gathered = vec![0.0; n_words * d];
        for (w, (&p, &ok)) in prepared.alignment.first_piece.iter().zip(&prepared.valid).enumerate() {
            if ok {
                gathered[w * d..(w + 1) * d].copy_from_slice(&hidden[p * d..(p + 1) * d]);
            }
        }
        affine(
            &gathered,
            self.params.get(self.head_weight_slot()),
            self.params.get(self.head_bias_slot()),
            n_words,
            d,
            N_FEATURES,
            &mut out,
        );
        for (row, ok) in out.chunks_exact_mut(N_FEATURES).zip(&prepared.valid) {
            if !ok {
                row.fill(0.0);
            }
        }
        (out, cache, gathered)
    }

    pub fn predict_words(&self, words: &[&str]) -> Result<SentencePrediction> {
        let prepared = self.prepare(words)?;
        let (out, _, _) = self.forward(&prepared);
        Ok(SentencePrediction {
            values: out
                .chunks_exact(N_FEATURES)
                .map(|r| TokenFeatures(r.try_into().expect("row of 8")))
                .collect(),
            mask: prepared.valid.clone(),
            truncated_words: prepared.truncated_words(),
        })
    }

    /// Adds `∂/∂θ Σ (ŷ − y)²` over valid words and features of one sentence
    /// to `grads` and returns `(Σ (ŷ − y)², number of valid words)`. With
    /// `train_encoder == false` only the head receives gradients.
    pub fn accumulate_gradients(
        &self,
        words: &[&str],
        targets: &[TokenFeatures],
        grads: &mut ParamSet,
        train_encoder: bool,
    ) -> Result<(f64, usize)> {
        if targets.len() != words.len() {
            return Err(Error::LengthMismatch(format!(
                "{} words, {} target rows",
                words.len(),
                targets.len()
            )));
        }
        let prepared = self.prepare(words)?;
        let (out, cache, gathered) = self.forward(&prepared);
        let d = self.encoder.hidden_size();
        let n_words = words.len();

        let mut d_out = vec![0.0; n_words * N_FEATURES];
        let mut sum_sq = 0.0;
        let mut n_valid = 0;
        for (w, ok) in prepared.valid.iter().enumerate() {
            if !ok {
                continue;
            }
            n_valid += 1;
            for g in 0..N_FEATURES {
                let diff = out[w * N_FEATURES + g] - targets[w].0[g];
                sum_sq += diff * diff;
                d_out[w * N_FEATURES + g] = 2.0 * diff;
            }
        }

        acc_at_b(
            &gathered,
            &d_out,
            n_words,
            d,
            N_FEATURES,
            grads.get_mut(self.head_weight_slot()),
        );
        acc_col_sum(&d_out, N_FEATURES, grads.get_mut(self.head_bias_slot()));

        if train_encoder {
            let mut d_gathered = vec![0.0; n_words * d];
            acc_a_bt(
                &d_out,
                self.params.get(self.head_weight_slot()),
                n_words,
                d,
                N_FEATURES,
                &mut d_gathered,
            );
            let mut d_hidden = vec![0.0; prepared.pieces.len() * d];
            for (w, &p) in prepared.alignment.first_piece.iter().enumerate() {
                if prepared.valid[w] {
                    for j in 0..d {
                        d_hidden[p * d + j] += d_gathered[w * d + j];
                    }
                }
            }
            self.encoder.backward(&self.params, &cache, &d_hidden, grads);
        }
        Ok((sum_sq, n_valid))
    }
}

impl<E: SequenceEncoder> Predictor for TokenRegressor<E> {
    fn predict_sentence(&self, words: &[&str]) -> Result<SentencePrediction> {
        self.predict_words(words)
    }
}
