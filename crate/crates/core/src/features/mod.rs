//! Token-level gaze measures.
//!
//! Per subject and token we derive counts and durations from the fixation
//! sequence ([`subject_measures`]), then average them over every subject of
//! the corpus ([`aggregate_token_features`]). Subjects that skipped a token,
//! or never read the sentence, contribute zeros. Vectors always follow
//! [`FEATURE_ORDER`].

mod standardize;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{validate_corpus, Corpus, Sentence, SubjectTrial};
use crate::{Error, Result};

pub use standardize::{FeatureRange, Standardizer, TARGET_MAX};

/// Number of gaze features per token.
pub const N_FEATURES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Feature {
    #[serde(rename = "nFix")]
    NFix,
    #[serde(rename = "FFD")]
    Ffd,
    #[serde(rename = "FPD")]
    Fpd,
    #[serde(rename = "TRT")]
    Trt,
    #[serde(rename = "MFD")]
    Mfd,
    #[serde(rename = "fProp")]
    FProp,
    #[serde(rename = "nRefix")]
    NRefix,
    #[serde(rename = "reProp")]
    ReProp,
}

/// Column order of every feature vector, matrix and file.
pub const FEATURE_ORDER: [Feature; N_FEATURES] = [
    Feature::NFix,
    Feature::Ffd,
    Feature::Fpd,
    Feature::Trt,
    Feature::Mfd,
    Feature::FProp,
    Feature::NRefix,
    Feature::ReProp,
];

impl Feature {
    pub const fn column(self) -> usize {
        self as usize
    }

    pub const fn name(self) -> &'static str {
        match self {
            Feature::NFix => "nFix",
            Feature::Ffd => "FFD",
            Feature::Fpd => "FPD",
            Feature::Trt => "TRT",
            Feature::Mfd => "MFD",
            Feature::FProp => "fProp",
            Feature::NRefix => "nRefix",
            Feature::ReProp => "reProp",
        }
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    /// Case-insensitive match on the short names.
    fn from_str(s: &str) -> Result<Self> {
        FEATURE_ORDER
            .iter()
            .copied()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownFeature(String::from(s)))
    }
}

/// Measures of one subject on one token.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SubjectTokenMeasures {
    pub n_fix: u32,
    pub ffd: f64,
    pub fpd: f64,
    pub trt: f64,
    pub mfd: f64,
    pub n_refix: u32,
    pub fixated: bool,
    pub refixated: bool,
}

/// Eight gaze features of one token, indexed by [`Feature`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenFeatures(pub [f64; N_FEATURES]);

impl TokenFeatures {
    pub fn get(&self, feature: Feature) -> f64 {
        self.0[feature.column()]
    }

    pub fn as_array(&self) -> &[f64; N_FEATURES] {
        &self.0
    }
}

impl Index<Feature> for TokenFeatures {
    type Output = f64;
    fn index(&self, f: Feature) -> &f64 {
        &self.0[f.column()]
    }
}

impl IndexMut<Feature> for TokenFeatures {
    fn index_mut(&mut self, f: Feature) -> &mut f64 {
        &mut self.0[f.column()]
    }
}

impl From<[f64; N_FEATURES]> for TokenFeatures {
    fn from(v: [f64; N_FEATURES]) -> Self {
        Self(v)
    }
}

/// How count and duration features are averaged across subjects.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Averaging {
    /// Divide by every subject of the corpus; skips count as zeros.
    #[default]
    AllSubjects,
    /// Divide by the subjects who fixated the token. Proportions still use
    /// all subjects.
    FixatingOnly,
}

/// Per-token measures of one subject reading one sentence.
///
/// First pass is the run of consecutive fixations that starts at the first
/// fixation on a token and ends as soon as another token is fixated.
pub fn subject_measures(trial: &SubjectTrial, sentence: &Sentence) -> Vec<SubjectTokenMeasures> {
    let mut out = vec![SubjectTokenMeasures::default(); sentence.tokens.len()];
    // whether the token's first pass is still running
    let mut in_first_pass = vec![false; sentence.tokens.len()];
    let mut previous: Option<usize> = None;

    for fix in &trial.fixations {
        let Some(m) = out.get_mut(fix.token_index) else {
            continue;
        };
        let t = fix.token_index;
        if m.n_fix == 0 {
            m.ffd = fix.duration_ms;
            m.fpd = fix.duration_ms;
            in_first_pass[t] = true;
        } else if in_first_pass[t] && previous == Some(t) {
            m.fpd += fix.duration_ms;
        }
        if let Some(p) = previous.filter(|&p| p != t) {
            in_first_pass[p] = false;
        }
        m.n_fix += 1;
        m.trt += fix.duration_ms;
        previous = Some(t);
    }

    for m in &mut out {
        if m.n_fix > 0 {
            m.mfd = m.trt / f64::from(m.n_fix);
            m.n_refix = m.n_fix - 1;
            m.fixated = true;
            m.refixated = m.n_fix >= 2;
        }
    }
    out
}

/// Averages the measures of one token over `n_subjects` subjects. Subjects
/// missing from `measures` count as having skipped the token.
pub fn aggregate_token_features(
    measures: &[SubjectTokenMeasures],
    n_subjects: usize,
    averaging: Averaging,
) -> Result<TokenFeatures> {
    if n_subjects == 0 {
        return Err(Error::NoSubjects);
    }
    if measures.len() > n_subjects {
        return Err(Error::LengthMismatch(format!(
            "{} measures for {} subjects",
            measures.len(),
            n_subjects
        )));
    }
    let mut sums = [0.0f64; N_FEATURES];
    let mut n_fixated = 0usize;
    let mut n_refixated = 0usize;
    for m in measures {
        sums[Feature::NFix.column()] += f64::from(m.n_fix);
        sums[Feature::Ffd.column()] += m.ffd;
        sums[Feature::Fpd.column()] += m.fpd;
        sums[Feature::Trt.column()] += m.trt;
        sums[Feature::Mfd.column()] += m.mfd;
        sums[Feature::NRefix.column()] += f64::from(m.n_refix);
        n_fixated += usize::from(m.fixated);
        n_refixated += usize::from(m.refixated);
    }

    let all = n_subjects as f64;
    let denom = match averaging {
        Averaging::AllSubjects => all,
        Averaging::FixatingOnly => n_fixated as f64,
    };
    let mut out = TokenFeatures::default();
    if denom > 0.0 {
        for f in [
            Feature::NFix,
            Feature::Ffd,
            Feature::Fpd,
            Feature::Trt,
            Feature::Mfd,
            Feature::NRefix,
        ] {
            out[f] = sums[f.column()] / denom;
        }
    }
    out[Feature::FProp] = n_fixated as f64 / all;
    out[Feature::ReProp] = n_refixated as f64 / all;
    Ok(out)
}

/// Where a dataset came from.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub corpus: String,
    pub split: String,
}

/// Feature rows of one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceFeatures {
    pub sentence_id: String,
    pub words: Vec<String>,
    pub values: Vec<TokenFeatures>,
}

impl SentenceFeatures {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Sentence-aligned feature matrices. Rows are ragged; padded views with an
/// explicit validity mask come from [`FeatureDataset::padded`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDataset {
    pub provenance: Provenance,
    pub sentences: Vec<SentenceFeatures>,
}

impl FeatureDataset {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            provenance,
            sentences: Vec::new(),
        }
    }

    pub const fn feature_order(&self) -> [Feature; N_FEATURES] {
        FEATURE_ORDER
    }

    pub fn n_tokens(&self) -> usize {
        self.sentences.iter().map(SentenceFeatures::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.n_tokens() == 0
    }

    pub fn tokens(&self) -> impl Iterator<Item = (&str, &TokenFeatures)> {
        self.sentences
            .iter()
            .flat_map(|s| s.words.iter().map(String::as_str).zip(s.values.iter()))
    }

    /// Rows of the listed sentences padded to their longest length, with
    /// `mask[b][l]` true exactly at real tokens.
    pub fn padded(&self, sentence_indices: &[usize]) -> (Vec<Vec<TokenFeatures>>, Vec<Vec<bool>>) {
        let width = sentence_indices
            .iter()
            .map(|&i| self.sentences[i].len())
            .max()
            .unwrap_or(0);
        let mut rows = Vec::with_capacity(sentence_indices.len());
        let mut mask = Vec::with_capacity(sentence_indices.len());
        for &i in sentence_indices {
            let s = &self.sentences[i];
            let mut row = s.values.clone();
            row.resize(width, TokenFeatures::default());
            let mut m = vec![true; s.len()];
            m.resize(width, false);
            rows.push(row);
            mask.push(m);
        }
        (rows, mask)
    }

    /// Keeps the listed sentences, in the given order.
    pub fn select(&self, sentence_indices: &[usize]) -> FeatureDataset {
        FeatureDataset {
            provenance: self.provenance.clone(),
            sentences: sentence_indices.iter().map(|&i| self.sentences[i].clone()).collect(),
        }
    }
}

/// Subject-averaged features for every token of a clean corpus.
pub fn extract_features(c: &Corpus, averaging: Averaging) -> Result<FeatureDataset> {
    let report = validate_corpus(c);
    if let Some(v) = report.violations.first() {
        return Err(Error::InvalidCorpus(format!(
            "{} violation(s), first: {v}",
            report.violations.len()
        )));
    }
    let n_subjects = c.n_subjects();
    let by_sentence = c.trials_by_sentence();

    let (corpus, split) = match c.name.rsplit_once('/') {
        Some((corpus, split)) => (String::from(corpus), String::from(split)),
        None => (c.name.clone(), String::from("all")),
    };
    let mut dataset = FeatureDataset::new(Provenance { corpus, split });

    for sentence in &c.sentences {
        let per_subject: Vec<Vec<SubjectTokenMeasures>> = by_sentence
            .get(sentence.sentence_id.as_str())
            .map(|trials| trials.iter().map(|t| subject_measures(t, sentence)).collect())
            .unwrap_or_default();
        let mut values = Vec::with_capacity(sentence.tokens.len());
        let mut column = Vec::with_capacity(per_subject.len());
        for token in 0..sentence.tokens.len() {
            column.clear();
            column.extend(per_subject.iter().map(|m| m[token]));
            values.push(aggregate_token_features(&column, n_subjects, averaging)?);
        }
        dataset.sentences.push(SentenceFeatures {
            sentence_id: sentence.sentence_id.clone(),
            words: sentence.tokens.iter().map(|t| t.surface.clone()).collect(),
            values,
        });
    }
    Ok(dataset)
}
