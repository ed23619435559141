use alloc::string::String;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("dataset has no valid tokens")]
    EmptyDataset,
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("need at least {needed} sentences to split, got {got}")]
    TooFewSentences { needed: usize, got: usize },
    #[error("corpus failed validation: {0}")]
    InvalidCorpus(String),
    #[error("aggregation needs at least one subject")]
    NoSubjects,
    #[error("standardizer is not fitted for feature {0}")]
    UnfittedStandardizer(String),
    #[error("invalid standardizer range for {feature}: min {min} > max {max}")]
    InvalidRange { feature: String, min: f64, max: f64 },
    #[error("unknown feature name: {0}")]
    UnknownFeature(String),
    #[error("unsupported language: {0}")]
    UnsupportedLanguage(String),
    #[error("word {word} received no subword pieces")]
    UnalignedWord { word: usize },
    #[error("subword pieces are out of word order at piece {piece}")]
    PieceOrder { piece: usize },
    #[error("cannot resolve encoder checkpoint {0}: no backend for pretrained weights")]
    UnresolvableCheckpoint(String),
    #[error("hidden size mismatch: spec says {expected}, encoder has {actual}")]
    HiddenSizeMismatch { expected: usize, actual: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite loss at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: usize, step: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("all positions are masked")]
    AllMasked,
    #[error("missing pairing: {0}")]
    MissingPair(String),
    #[error("fraction {0} selects no training sentences")]
    EmptyFraction(f64),
    #[error("invalid fraction grid: {0}")]
    InvalidFractions(String),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("parameter blob does not match the model layout: {0}")]
    ParamLayout(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
