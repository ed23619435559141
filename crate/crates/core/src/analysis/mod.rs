//! Input-characteristic analyses: readability, word length and part of
//! speech.

mod curves;
mod pos;
mod readability;
mod syllables;

pub use curves::{readability_accuracy_curve, word_length_curve, BinPoint, BinnedCurve, SeriesInput, WORD_LENGTH_CAP};
pub use pos::{pos_aggregation, TagGroup};
pub use readability::{coefficients, flesch, flesch_from_counts, FleschCoefficients, ReadabilityScore};
pub use syllables::{count_syllables, is_word};
