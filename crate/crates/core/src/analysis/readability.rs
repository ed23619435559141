//! Flesch Reading Ease and its language adaptations.
//!
//! `score = base − asl · ASL − asw · ASW` with ASL = words per sentence and
//! ASW = syllables per word, clamped to `[0, 100]`.
//!
//! | lang | base    | asl   | asw  | source |
//! |------|---------|-------|------|--------|
//! | en   | 206.835 | 1.015 | 84.6 | Flesch (1948) |
//! | nl   | 206.835 | 0.93  | 77.0 | Douma (1960) |
//! | de   | 180.0   | 1.0   | 58.5 | Amstad (1978) |
//! | ru   | 206.835 | 1.3   | 60.1 | Oborneva (2006) |

use alloc::string::String;

use serde::{Deserialize, Serialize};

use super::syllables::{count_syllables, is_word};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FleschCoefficients {
    pub base: f64,
    pub asl: f64,
    pub asw: f64,
}

pub fn coefficients(language: &str) -> Result<FleschCoefficients> {
    let (base, asl, asw) = match language {
        "en" => (206.835, 1.015, 84.6),
        "nl" => (206.835, 0.93, 77.0),
        "de" => (180.0, 1.0, 58.5),
        "ru" => (206.835, 1.3, 60.1),
        other => return Err(Error::UnsupportedLanguage(String::from(other))),
    };
    Ok(FleschCoefficients { base, asl, asw })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityScore {
    /// Clamped to `[0, 100]`.
    pub value: f64,
    /// Formula value before clamping.
    pub raw: f64,
    pub language: String,
    pub avg_sentence_length: f64,
    pub avg_syllables_per_word: f64,
}

/// Score from precomputed averages.
pub fn flesch_from_counts(
    language: &str,
    avg_sentence_length: f64,
    avg_syllables_per_word: f64,
) -> Result<ReadabilityScore> {
    let c = coefficients(language)?;
    let raw = c.base - c.asl * avg_sentence_length - c.asw * avg_syllables_per_word;
    Ok(ReadabilityScore {
        value: raw.clamp(0.0, 100.0),
        raw,
        language: String::from(language),
        avg_sentence_length,
        avg_syllables_per_word,
    })
}

/// Readability of tokenized sentences. Only tokens containing a letter count
/// as words; sentences without words are ignored.
pub fn flesch<S: AsRef<str>>(sentences: &[&[S]], language: &str) -> Result<ReadabilityScore> {
    coefficients(language)?;
    let mut n_sentences = 0usize;
    let mut n_words = 0usize;
    let mut n_syllables = 0usize;
    for sentence in sentences {
        let mut words_here = 0;
        for token in sentence.iter().map(AsRef::as_ref).filter(|t| is_word(t)) {
            words_here += 1;
            n_syllables += count_syllables(token, language)?;
        }
        if words_here > 0 {
            n_sentences += 1;
            n_words += words_here;
        }
    }
    if n_words == 0 {
        return Err(Error::EmptyCorpus);
    }
    flesch_from_counts(
        language,
        n_words as f64 / n_sentences as f64,
        n_syllables as f64 / n_words as f64,
    )
}
