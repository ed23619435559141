use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use super::{is_language_code, Corpus};

/// Invariant broken by a corpus entity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    LanguageCode,
    EmptySentence,
    DuplicateSentence,
    EmptySurface,
    CharLength,
    TokenIndex,
    UnknownSentence,
    UnknownSubject,
    DuplicateTrial,
    FixationTokenRange,
    FixationDuration,
    FixationOrder,
}

impl Rule {
    pub fn describe(self) -> &'static str {
        match self {
            Rule::LanguageCode => "language must be a two-letter lowercase code",
            Rule::EmptySentence => "sentence must have at least one token",
            Rule::DuplicateSentence => "sentence_id must be unique",
            Rule::EmptySurface => "token surface must be non-empty",
            Rule::CharLength => "char_length must equal the character count of surface",
            Rule::TokenIndex => "token indices must be contiguous from 0",
            Rule::UnknownSentence => "trial references an unknown sentence",
            Rule::UnknownSubject => "trial subject is not registered",
            Rule::DuplicateTrial => "(subject, sentence) pair must appear at most once",
            Rule::FixationTokenRange => "fixation token_index must be below the sentence length",
            Rule::FixationDuration => "fixation duration must be positive and finite",
            Rule::FixationOrder => "fixation order must be sorted and contiguous from 0",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Offending entity, e.g. `sentence s3` or `trial (p01, s3)`.
    pub entity: String,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.entity, self.rule.describe(), self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, entity: String, rule: Rule, detail: String) {
        self.violations.push(Violation { entity, rule, detail });
    }
}

/// Checks every corpus invariant. Each broken rule is reported once per
/// entity, so one seeded defect yields exactly one violation.
pub fn validate_corpus(c: &Corpus) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !is_language_code(&c.language) {
        report.push(
            format!("corpus {}", c.name),
            Rule::LanguageCode,
            format!("got {:?}", c.language),
        );
    }

    let mut lengths = alloc::collections::BTreeMap::new();
    for sentence in &c.sentences {
        let entity = format!("sentence {}", sentence.sentence_id);
        if lengths.contains_key(sentence.sentence_id.as_str()) {
            report.push(entity.clone(), Rule::DuplicateSentence, String::from("repeated id"));
        } else {
            lengths.insert(sentence.sentence_id.as_str(), sentence.tokens.len());
        }
        if sentence.tokens.is_empty() {
            report.push(entity.clone(), Rule::EmptySentence, String::from("0 tokens"));
        }
        if let Some((i, _)) = sentence.tokens.iter().enumerate().find(|(_, t)| t.surface.is_empty()) {
            report.push(entity.clone(), Rule::EmptySurface, format!("token {i}"));
        }
        if let Some(t) = sentence
            .tokens
            .iter()
            .find(|t| !t.surface.is_empty() && t.char_length != t.surface.chars().count())
        {
            report.push(
                entity.clone(),
                Rule::CharLength,
                format!("token {} {:?} has char_length {}", t.index, t.surface, t.char_length),
            );
        }
        if let Some((pos, t)) = sentence.tokens.iter().enumerate().find(|(i, t)| t.index != *i) {
            report.push(
                entity,
                Rule::TokenIndex,
                format!("position {pos} has index {}", t.index),
            );
        }
    }

    let mut seen_pairs: BTreeSet<(&str, &str)> = BTreeSet::new();
    for trial in &c.trials {
        let entity = format!("trial ({}, {})", trial.subject_id, trial.sentence_id);
        if !c.subject_ids.contains(&trial.subject_id) {
            report.push(entity.clone(), Rule::UnknownSubject, trial.subject_id.clone());
        }
        if !seen_pairs.insert((trial.subject_id.as_str(), trial.sentence_id.as_str())) {
            report.push(entity.clone(), Rule::DuplicateTrial, String::from("repeated pair"));
        }
        let n_tokens = match lengths.get(trial.sentence_id.as_str()) {
            Some(&n) => Some(n),
            None => {
                report.push(entity.clone(), Rule::UnknownSentence, trial.sentence_id.clone());
                None
            }
        };
        if let Some(n) = n_tokens {
            if let Some(f) = trial.fixations.iter().find(|f| f.token_index >= n) {
                report.push(
                    entity.clone(),
                    Rule::FixationTokenRange,
                    format!("order {} points at token {} of {}", f.order, f.token_index, n),
                );
            }
        }
        if let Some(f) = trial
            .fixations
            .iter()
            .find(|f| !(f.duration_ms.is_finite() && f.duration_ms > 0.0))
        {
            report.push(
                entity.clone(),
                Rule::FixationDuration,
                format!("order {} has duration {}", f.order, f.duration_ms),
            );
        }
        if let Some((pos, f)) = trial.fixations.iter().enumerate().find(|(i, f)| f.order != *i) {
            report.push(
                entity,
                Rule::FixationOrder,
                format!("position {pos} has order {}", f.order),
            );
        }
    }

    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Sentence, SubjectTrial};

    fn clean() -> Corpus {
        let mut c = Corpus::new("fixture", "en");
        c.sentences
            .push(Sentence::from_words("d", "s1", &["Mary", "French", "smiled"]));
        c.sentences.push(Sentence::from_words("d", "s2", &["She", "left"]));
        c.push_trial(SubjectTrial::from_sequence("p1", "s1", &[(0, 200.0), (1, 180.0)]));
        c.push_trial(SubjectTrial::from_sequence("p1", "s2", &[(1, 150.0)]));
        c.push_trial(SubjectTrial::from_sequence("p2", "s1", &[]));
        c
    }

    #[test]
    fn clean_fixture_has_no_violations() {
        assert!(validate_corpus(&clean()).is_clean());
    }

    #[test]
    fn duplicated_trial_is_one_violation() {
        let mut c = clean();
        c.push_trial(SubjectTrial::from_sequence("p1", "s2", &[(0, 90.0)]));
        let report = validate_corpus(&c);
        assert_eq!(report.len(), 1);
        assert_eq!(report.violations[0].rule, Rule::DuplicateTrial);
    }

    #[test]
    fn three_seeded_defects_give_three_violations() {
        let mut c = clean();
        c.trials[0].fixations[1].token_index = 3;
        c.trials[1].fixations[0].duration_ms = 0.0;
        c.sentences[1].tokens[1].char_length = 9;
        let report = validate_corpus(&c);
        let rules: Vec<Rule> = report.violations.iter().map(|v| v.rule).collect();
        assert_eq!(
            rules,
            [Rule::CharLength, Rule::FixationTokenRange, Rule::FixationDuration]
        );
    }

    #[test]
    fn unknown_sentence_and_subject() {
        let mut c = clean();
        c.trials.push(SubjectTrial::from_sequence("ghost", "s9", &[(0, 100.0)]));
        let rules: Vec<Rule> = validate_corpus(&c).violations.iter().map(|v| v.rule).collect();
        assert_eq!(rules, [Rule::UnknownSubject, Rule::UnknownSentence]);
    }

    #[test]
    fn order_gaps_and_bad_language() {
        let mut c = clean();
        c.language = "english".into();
        c.trials[0].fixations[1].order = 5;
        let rules: Vec<Rule> = validate_corpus(&c).violations.iter().map(|v| v.rule).collect();
        assert_eq!(rules, [Rule::LanguageCode, Rule::FixationOrder]);
    }

    #[test]
    fn empty_and_duplicate_sentences() {
        let mut c = clean();
        c.sentences.push(Sentence::from_words::<&str>("d", "s3", &[]));
        c.sentences.push(Sentence::from_words("d", "s1", &["again"]));
        let rules: Vec<Rule> = validate_corpus(&c).violations.iter().map(|v| v.rule).collect();
        assert_eq!(rules, [Rule::EmptySentence, Rule::DuplicateSentence]);
    }
}
