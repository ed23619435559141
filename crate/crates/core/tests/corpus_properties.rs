use std::collections::BTreeSet;

use gazekit_core::corpus::synthetic::{human_like, SyntheticSpec};
use gazekit_core::corpus::{
    corpus_stats, split_dataset, validate_corpus, Corpus, Rule, Sentence, SplitRatios, SubjectTrial,
};
use proptest::prelude::*;

fn corpus_of(sentences: &[Vec<String>], n_subjects: usize) -> Corpus {
    let mut c = Corpus::new("c", "en");
    for (i, words) in sentences.iter().enumerate() {
        c.sentences.push(Sentence::from_words("d", format!("s{i}"), words));
    }
    for p in 0..n_subjects {
        c.subject_ids.insert(format!("p{p}"));
    }
    c
}

fn sentences() -> impl Strategy<Value = Vec<Vec<String>>> {
    prop::collection::vec(prop::collection::vec("[a-cA-C]{1,6}|ё{1,3}", 1..12), 1..20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn stats_equal_recount(s in sentences(), n_subjects in 0usize..6) {
        let c = corpus_of(&s, n_subjects);
        let got = corpus_stats(&c).unwrap();
        let mut tokens = 0usize;
        let mut chars = 0usize;
        let (mut wmin, mut wmax) = (usize::MAX, 0usize);
        let (mut smin, mut smax) = (usize::MAX, 0usize);
        let mut types = BTreeSet::new();
        for sent in &s {
            smin = smin.min(sent.len());
            smax = smax.max(sent.len());
            for w in sent {
                tokens += 1;
                let n = w.chars().count();
                chars += n;
                wmin = wmin.min(n);
                wmax = wmax.max(n);
                types.insert(w.clone());
            }
        }
        prop_assert_eq!(got.n_subjects, n_subjects);
        prop_assert_eq!(got.n_sentences, s.len());
        prop_assert_eq!(got.n_tokens, tokens);
        prop_assert_eq!(got.n_types, types.len());
        prop_assert_eq!((got.sent_length_min, got.sent_length_max), (smin, smax));
        prop_assert_eq!((got.word_length_min, got.word_length_max), (wmin, wmax));
        prop_assert!((got.sent_length_mean - tokens as f64 / s.len() as f64).abs() < 1e-12);
        prop_assert!((got.word_length_mean - chars as f64 / tokens as f64).abs() < 1e-12);
        prop_assert!(got.word_length_min as f64 <= got.word_length_mean && got.word_length_mean <= got.word_length_max as f64);
    }

    #[test]
    fn splits_partition_sentences(n in 3usize..150, seed in any::<u64>(), a in 1u32..20, b in 1u32..20, t in 1u32..20) {
        let words: Vec<Vec<String>> = (0..n).map(|i| vec![format!("w{i}")]).collect();
        let mut c = corpus_of(&words, 1);
        for i in 0..n {
            c.push_trial(SubjectTrial::from_sequence("p0", format!("s{i}"), &[(0, 100.0)]));
        }
        let total = f64::from(a + b + t);
        let ratios = SplitRatios::new(f64::from(a) / total, f64::from(b) / total, f64::from(t) / total).unwrap();
        let Ok((tr, va, te)) = split_dataset(&c, ratios, seed) else {
            // only when rounding leaves no training sentence
            prop_assert!(n < 3 * 20);
            return Ok(());
        };
        let ids = |x: &Corpus| x.sentences.iter().map(|s| s.sentence_id.clone()).collect::<BTreeSet<_>>();
        let (x, y, z) = (ids(&tr), ids(&va), ids(&te));
        prop_assert!(x.is_disjoint(&y) && x.is_disjoint(&z) && y.is_disjoint(&z));
        let all: BTreeSet<String> = x.union(&y).chain(z.iter()).cloned().collect();
        prop_assert_eq!(all, ids(&c));
        for part in [&tr, &va, &te] {
            let sids = ids(part);
            prop_assert!(part.trials.iter().all(|t| sids.contains(&t.sentence_id)));
            prop_assert_eq!(part.trials.len(), part.sentences.len());
        }
    }
}

#[test]
fn ninety_five_five() {
    let c = human_like(
        "syn",
        &SyntheticSpec {
            n_sentences: 100,
            ..SyntheticSpec::default()
        },
    );
    let (a, b, t) = split_dataset(&c, SplitRatios::default(), 3).unwrap();
    assert_eq!((a.sentences.len(), b.sentences.len(), t.sentences.len()), (90, 5, 5));
    let again = split_dataset(&c, SplitRatios::default(), 3).unwrap();
    assert_eq!(again.2, t);
    let other = split_dataset(&c, SplitRatios::default(), 4).unwrap();
    assert_ne!(other.2.sentences, t.sentences);
}

#[test]
fn seeded_defects_are_each_reported() {
    let mut c = human_like(
        "syn",
        &SyntheticSpec {
            n_sentences: 20,
            ..SyntheticSpec::default()
        },
    );
    assert!(validate_corpus(&c).is_clean());
    // 1: trial duplicated, 2: fixation past the sentence end, 3: zero duration
    let dup = c.trials[0].clone();
    c.trials.push(dup);
    let victim = c.trials.iter().position(|t| t.fixations.len() >= 2).unwrap();
    let n = c
        .sentences
        .iter()
        .find(|s| s.sentence_id == c.trials[victim].sentence_id)
        .unwrap()
        .len();
    c.trials[victim].fixations[0].token_index = n;
    let other = c.trials.iter().rposition(|t| !t.fixations.is_empty()).unwrap();
    assert_ne!(other, victim);
    c.trials[other].fixations[0].duration_ms = 0.0;

    let report = validate_corpus(&c);
    assert_eq!(report.len(), 3, "{report:?}");
    let rules: BTreeSet<Rule> = report.violations.iter().map(|v| v.rule).collect();
    assert_eq!(
        rules,
        BTreeSet::from([Rule::DuplicateTrial, Rule::FixationTokenRange, Rule::FixationDuration])
    );
}
