//! Token regression on top of a sequence encoder.
//!
//! A [`TokenRegressor`] is an encoder plus one linear head shared by all
//! positions that projects hidden states onto the eight gaze features. Words
//! are read off their first subword piece, both for the loss and for
//! prediction. [`train`] implements the fine-tuning recipe: AdamW, linear
//! learning-rate decay, global-norm clipping and early stopping on
//! validation accuracy.

mod encoder;
mod linalg;
mod model;
pub mod params;
mod tokenize;
mod train;

pub use encoder::{DeskConfig, SequenceEncoder, TinyCache, TinyTransformer, LENGTH_BUCKETS};
pub use model::{build_regressor, EncoderSpec, ModelCard, Prepared, TokenRegressor, DESK_BATCH_SIZE, MODEL_CARDS};
pub use params::{clip_global_norm, AdamW, LinearDecay, ParamSet, Tensor};
pub use tokenize::{
    align_subwords, HashedChunks, Piece, SubwordAlignment, SubwordTokenizer, WordPiece, CLS_ID, SEP_ID, UNK_ID,
};
pub use train::{
    mse_loss, train, EarlyStopping, EpochRecord, Loss, StepRecord, TrainConfig, TrainingHistory, DEFAULT_SEEDS,
};
