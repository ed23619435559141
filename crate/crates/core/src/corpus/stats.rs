use alloc::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::{Error, Result};

/// Descriptive statistics in the layout of a corpus summary table.
/// Types are counted case-sensitively on exact surface forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_subjects: usize,
    pub n_sentences: usize,
    pub n_tokens: usize,
    pub n_types: usize,
    pub sent_length_mean: f64,
    pub sent_length_min: usize,
    pub sent_length_max: usize,
    pub word_length_mean: f64,
    pub word_length_min: usize,
    pub word_length_max: usize,
}

pub fn corpus_stats(c: &Corpus) -> Result<CorpusStats> {
    let n_tokens: usize = c.sentences.iter().map(|s| s.tokens.len()).sum();
    if c.sentences.is_empty() || n_tokens == 0 {
        return Err(Error::EmptyCorpus);
    }
    let sent_lengths = c.sentences.iter().map(|s| s.tokens.len());
    let word_lengths = c.sentences.iter().flat_map(|s| s.tokens.iter().map(|t| t.char_length));
    let types: BTreeSet<&str> = c
        .sentences
        .iter()
        .flat_map(|s| s.tokens.iter().map(|t| t.surface.as_str()))
        .collect();

    Ok(CorpusStats {
        n_subjects: c.subject_ids.len(),
        n_sentences: c.sentences.len(),
        n_tokens,
        n_types: types.len(),
        sent_length_mean: n_tokens as f64 / c.sentences.len() as f64,
        sent_length_min: sent_lengths.clone().min().unwrap_or(0),
        sent_length_max: sent_lengths.max().unwrap_or(0),
        word_length_mean: word_lengths.clone().sum::<usize>() as f64 / n_tokens as f64,
        word_length_min: word_lengths.clone().min().unwrap_or(0),
        word_length_max: word_lengths.max().unwrap_or(0),
    })
}
