//! Line-delimited JSON corpus format, one sentence per line:
//!
//! ```json
//! {"document_id": "d1", "sentence_id": "s1", "language": "en",
//!  "tokens": ["Mary", "had"],
//!  "trials": [{"subject_id": "p1",
//!              "fixations": [{"token_index": 0, "duration_ms": 233.0, "order": 0}]}]}
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use gazekit_core::corpus::{validate_corpus, Corpus, FixationEvent, Sentence, SubjectTrial};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const UNIFIED_JSONL: &str = "unified-jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FixationRecord {
    token_index: usize,
    duration_ms: f64,
    order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrialRecord {
    subject_id: String,
    fixations: Vec<FixationRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SentenceRecord {
    document_id: String,
    sentence_id: String,
    language: String,
    tokens: Vec<String>,
    trials: Vec<TrialRecord>,
}

/// Parses a unified-jsonl stream without checking corpus invariants.
/// Blank lines are skipped. The corpus takes its language from the first
/// record.
pub fn read_unified<R: BufRead>(reader: R, name: &str, path: &Path) -> Result<Corpus> {
    let mut corpus: Option<Corpus> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut de = serde_json::Deserializer::from_str(&line);
        let rec: SentenceRecord = serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Record {
            path: path.to_path_buf(),
            line: line_no,
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        let c = corpus.get_or_insert_with(|| Corpus::new(name, rec.language.clone()));
        if rec.language != c.language {
            return Err(Error::Record {
                path: path.to_path_buf(),
                line: line_no,
                field: String::from("language"),
                message: format!("{:?} differs from the corpus language {:?}", rec.language, c.language),
            });
        }
        c.sentences.push(Sentence::from_words(
            rec.document_id,
            rec.sentence_id.clone(),
            &rec.tokens,
        ));
        for t in rec.trials {
            c.push_trial(SubjectTrial {
                subject_id: t.subject_id,
                sentence_id: rec.sentence_id.clone(),
                fixations: t
                    .fixations
                    .into_iter()
                    .map(|f| FixationEvent {
                        token_index: f.token_index,
                        duration_ms: f.duration_ms,
                        order: f.order,
                    })
                    .collect(),
            });
        }
    }
    corpus.ok_or_else(|| Error::Data(format!("{}: no records", path.display())))
}

/// Reads a corpus file in `format` and checks every corpus invariant.
pub fn load_corpus(path: &Path, format: &str) -> Result<Corpus> {
    let c = read_corpus(path, format)?;
    let report = validate_corpus(&c);
    if let Some(first) = report.violations.first() {
        return Err(Error::Invalid {
            path: path.to_path_buf(),
            count: report.len(),
            first: first.to_string(),
        });
    }
    Ok(c)
}

/// Reads a corpus file in `format` without validating it.
pub fn read_corpus(path: &Path, format: &str) -> Result<Corpus> {
    if format != UNIFIED_JSONL {
        return Err(Error::UnknownFormat(format.to_string()));
    }
    let file = File::open(path).map_err(Error::io(path))?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("corpus");
    read_unified(BufReader::new(file), name, path)
}

/// Writes one line per sentence, each carrying that sentence's trials in
/// corpus order.
pub fn write_unified<W: Write>(c: &Corpus, mut out: W) -> std::io::Result<()> {
    let by_sentence = c.trials_by_sentence();
    for s in &c.sentences {
        let rec = SentenceRecord {
            document_id: s.document_id.clone(),
            sentence_id: s.sentence_id.clone(),
            language: c.language.clone(),
            tokens: s.words().map(String::from).collect(),
            trials: by_sentence
                .get(s.sentence_id.as_str())
                .map(|ts| {
                    ts.iter()
                        .map(|t| TrialRecord {
                            subject_id: t.subject_id.clone(),
                            fixations: t
                                .fixations
                                .iter()
                                .map(|f| FixationRecord {
                                    token_index: f.token_index,
                                    duration_ms: f.duration_ms,
                                    order: f.order,
                                })
                                .collect(),
                        })
                        .collect()
                })
                .unwrap_or_default(),
        };
        serde_json::to_writer(&mut out, &rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn save_corpus(c: &Corpus, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    write_unified(c, BufWriter::new(file)).map_err(Error::io(path))
}
