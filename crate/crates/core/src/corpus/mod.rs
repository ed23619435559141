//! Normalized eye-tracking corpus model.
//!
//! A [`Corpus`] holds sentences (tokenized text) and subject trials (the
//! chronological fixations one subject made while reading one sentence).
//! Fixations are already mapped to token indices; onset timestamps are not
//! needed by any measure, so only durations and order are kept.

mod split;
mod stats;
pub mod synthetic;
mod validate;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use split::{split_dataset, SplitRatios};
pub use stats::{corpus_stats, CorpusStats};
pub use validate::{validate_corpus, Rule, ValidationReport, Violation};

/// Languages with syllable rules and readability coefficients.
pub const SUPPORTED_LANGUAGES: [&str; 4] = ["en", "nl", "de", "ru"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    pub index: usize,
    pub char_length: usize,
}

impl Token {
    pub fn new(surface: impl Into<String>, index: usize) -> Self {
        let surface = surface.into();
        let char_length = surface.chars().count();
        Self {
            surface,
            index,
            char_length,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub sentence_id: String,
    pub document_id: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    /// Builds a sentence from surfaces, numbering tokens from zero.
    pub fn from_words<S: AsRef<str>>(
        document_id: impl Into<String>,
        sentence_id: impl Into<String>,
        words: &[S],
    ) -> Self {
        Self {
            sentence_id: sentence_id.into(),
            document_id: document_id.into(),
            tokens: words
                .iter()
                .enumerate()
                .map(|(i, w)| Token::new(w.as_ref(), i))
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.surface.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixationEvent {
    pub token_index: usize,
    pub duration_ms: f64,
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectTrial {
    pub subject_id: String,
    pub sentence_id: String,
    pub fixations: Vec<FixationEvent>,
}

impl SubjectTrial {
    /// Builds a trial from `(token_index, duration_ms)` pairs in reading order.
    pub fn from_sequence(
        subject_id: impl Into<String>,
        sentence_id: impl Into<String>,
        sequence: &[(usize, f64)],
    ) -> Self {
        Self {
            subject_id: subject_id.into(),
            sentence_id: sentence_id.into(),
            fixations: sequence
                .iter()
                .enumerate()
                .map(|(order, &(token_index, duration_ms))| FixationEvent {
                    token_index,
                    duration_ms,
                    order,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub language: String,
    pub sentences: Vec<Sentence>,
    pub trials: Vec<SubjectTrial>,
    pub subject_ids: BTreeSet<String>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, language: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            language: language.into(),
            sentences: Vec::new(),
            trials: Vec::new(),
            subject_ids: BTreeSet::new(),
        }
    }

    pub fn n_subjects(&self) -> usize {
        self.subject_ids.len()
    }

    /// Adds a trial and registers its subject.
    pub fn push_trial(&mut self, trial: SubjectTrial) {
        self.subject_ids.insert(trial.subject_id.clone());
        self.trials.push(trial);
    }

    /// Trials grouped by sentence id, each group in corpus order.
    pub fn trials_by_sentence(&self) -> BTreeMap<&str, Vec<&SubjectTrial>> {
        let mut map: BTreeMap<&str, Vec<&SubjectTrial>> = BTreeMap::new();
        for trial in &self.trials {
            map.entry(trial.sentence_id.as_str()).or_default().push(trial);
        }
        map
    }

    /// Sub-corpus with the sentences at `indices` (in the given order) and
    /// their trials. The subject set is kept whole so that subject-averaged
    /// measures keep the same denominator in every split.
    pub fn select(&self, indices: &[usize], name: impl Into<String>) -> Corpus {
        let sentences: Vec<Sentence> = indices.iter().map(|&i| self.sentences[i].clone()).collect();
        let ids: BTreeSet<&str> = sentences.iter().map(|s| s.sentence_id.as_str()).collect();
        let trials = self
            .trials
            .iter()
            .filter(|t| ids.contains(t.sentence_id.as_str()))
            .cloned()
            .collect();
        Corpus {
            name: name.into(),
            language: self.language.clone(),
            sentences,
            trials,
            subject_ids: self.subject_ids.clone(),
        }
    }
}

/// Two lowercase ASCII letters, as in ISO 639-1.
pub fn is_language_code(code: &str) -> bool {
    code.len() == 2 && code.bytes().all(|b| b.is_ascii_lowercase())
}
