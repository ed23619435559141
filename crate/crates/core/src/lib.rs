//! Core algorithms for predicting human reading behaviour from text.
//!
//! The crate turns per-subject fixation records into eight token-level gaze
//! measures, fits a token regression model on top of a sequence encoder and
//! scores predictions with masked absolute-error metrics. Everything here is
//! pure computation over in-memory data; file formats and the command-line
//! tool live in the `gazekit` crate.
//!
//! Module map:
//!
//! * [`corpus`]: interchange data model, validation, statistics and splits.
//! * [`features`]: per-subject measures, subject averaging and 0–100 scaling.
//! * [`regression`]: subword alignment, the desk-scale encoder, the regression
//!   head and the training loop.
//! * [`evaluation`]: MAE/accuracy, the mean baseline, seed aggregation,
//!   transfer matrices and data-ablation curves.
//! * [`analysis`]: readability scores, word-length and readability curves and
//!   part-of-speech aggregation.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod regression;

pub use error::{Error, Result};
