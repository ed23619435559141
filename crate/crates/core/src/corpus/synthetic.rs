//! Simulated reading data for tests, demos and smoke runs.
//!
//! Readers move left to right. Each word is fixated with a probability that
//! grows with its length, long words are refixated more often and take
//! longer to read, and now and then a reader jumps back to an earlier word.
//! Durations are log-normal and differ per reader, so standardized values
//! are skewed the way real gaze data is.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, Sentence, SubjectTrial};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_sentences: usize,
    pub n_subjects: usize,
    pub min_words: usize,
    pub max_words: usize,
    /// Chance that a reader jumps back to an earlier word once per sentence.
    pub regression_rate: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_sentences: 240,
            n_subjects: 6,
            min_words: 6,
            max_words: 16,
            regression_rate: 0.25,
            seed: 7,
        }
    }
}

const FUNCTION_WORDS: [&str; 12] = [
    "a", "I", "of", "to", "in", "it", "is", "the", "and", "was", "for", "that",
];
const LETTERS: &[u8] = b"eeeeaaaoooiiinnsshrrdltcumwfgypbvk";

/// Probability that a reader fixates a word of `len` characters.
pub fn fixation_probability(len: usize) -> f64 {
    (0.12 + 0.08 * len as f64).min(0.97)
}

fn refixation_probability(len: usize) -> f64 {
    (0.035 * len as f64).min(0.6)
}

fn word_length(rng: &mut ChaCha8Rng) -> usize {
    // roughly the shape of English running text, with a long tail
    let u: f64 = rng.random();
    let len = 1.0 + libm::floor(-libm::log(1.0 - u) * 5.0);
    (len as usize).min(18)
}

fn make_word(rng: &mut ChaCha8Rng) -> String {
    if rng.random_bool(0.3) {
        return String::from(FUNCTION_WORDS[rng.random_range(0..FUNCTION_WORDS.len())]);
    }
    let len = word_length(rng);
    (0..len)
        .map(|_| LETTERS[rng.random_range(0..LETTERS.len())] as char)
        .collect()
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

fn duration(rng: &mut ChaCha8Rng, len: usize, speed: f64) -> f64 {
    let median = (150.0 + 9.0 * len as f64) * speed;
    libm::round(median * libm::exp(0.35 * standard_normal(rng))).max(50.0)
}

/// Deterministic corpus for `spec`, named `name`, in English.
pub fn human_like(name: &str, spec: &SyntheticSpec) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut c = Corpus::new(name, "en");
    let (lo, hi) = (spec.min_words.max(1), spec.max_words.max(spec.min_words.max(1)));
    for s in 0..spec.n_sentences {
        let n = rng.random_range(lo..=hi);
        let words: Vec<String> = (0..n).map(|_| make_word(&mut rng)).collect();
        c.sentences
            .push(Sentence::from_words(format!("d{}", s / 10), format!("s{s:04}"), &words));
    }
    let speeds: Vec<f64> = (0..spec.n_subjects)
        .map(|_| libm::exp(0.15 * standard_normal(&mut rng)))
        .collect();
    let mut trials = Vec::with_capacity(speeds.len() * c.sentences.len());
    for (subject, &speed) in speeds.iter().enumerate() {
        for sentence in &c.sentences {
            let mut seq: Vec<(usize, f64)> = Vec::new();
            for (i, tok) in sentence.tokens.iter().enumerate() {
                let len = tok.char_length;
                if !rng.random_bool(fixation_probability(len)) {
                    continue;
                }
                seq.push((i, duration(&mut rng, len, speed)));
                if rng.random_bool(refixation_probability(len)) {
                    seq.push((i, duration(&mut rng, len, speed) * 0.7));
                }
            }
            if seq.len() > 1 && rng.random_bool(spec.regression_rate) {
                let back = seq[rng.random_range(0..seq.len() - 1)].0;
                let len = sentence.tokens[back].char_length;
                seq.push((back, duration(&mut rng, len, speed)));
            }
            trials.push(SubjectTrial::from_sequence(
                format!("p{subject:02}"),
                sentence.sentence_id.clone(),
                &seq,
            ));
        }
    }
    // sentence-major, the order a file lists them in
    let n = c.sentences.len();
    for i in 0..n {
        for t in trials.iter().skip(i).step_by(n.max(1)) {
            c.push_trial(t.clone());
        }
    }
    c
}
