//! Tabular and JSON files: feature TSV, scaler state, POS tags and the
//! plot-ready CSV outputs.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use gazekit_core::analysis::{BinnedCurve, TagGroup};
use gazekit_core::evaluation::{AblationCurve, CrossMatrix, EvaluationReport};
use gazekit_core::features::{
    FeatureDataset, Provenance, SentenceFeatures, Standardizer, TokenFeatures, FEATURE_ORDER,
};
use gazekit_core::regression::TrainingHistory;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::json(path))?;
    text.push('\n');
    std::fs::write(path, text).map_err(Error::io(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(Error::io(path))?;
    serde_json::from_str(&text).map_err(Error::json(path))
}

fn writer(path: &Path, delimiter: u8) -> Result<csv::Writer<File>> {
    csv::WriterBuilder::new()
        .delimiter(delimiter)
        .from_path(path)
        .map_err(Error::csv(path))
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<()> {
    w.flush().map_err(Error::io(path))
}

fn feature_header() -> impl Iterator<Item = String> {
    FEATURE_ORDER.iter().map(|f| f.name().to_string())
}

/// `sentence_id, token_index, surface`, then the eight features.
pub fn write_features_tsv(path: &Path, d: &FeatureDataset) -> Result<()> {
    let mut w = writer(path, b'\t')?;
    let mut header = vec!["sentence_id".to_string(), "token_index".into(), "surface".into()];
    header.extend(feature_header());
    w.write_record(&header).map_err(Error::csv(path))?;
    for s in &d.sentences {
        for (i, (word, v)) in s.words.iter().zip(&s.values).enumerate() {
            let mut row = vec![s.sentence_id.clone(), i.to_string(), word.clone()];
            row.extend(v.0.iter().map(f64::to_string));
            w.write_record(&row).map_err(Error::csv(path))?;
        }
    }
    finish(w, path)
}

pub fn read_features_tsv(path: &Path, provenance: Provenance) -> Result<FeatureDataset> {
    let mut r = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_path(path)
        .map_err(Error::csv(path))?;
    let header = r.headers().map_err(Error::csv(path))?.clone();
    let mut want = vec!["sentence_id".to_string(), "token_index".into(), "surface".into()];
    want.extend(feature_header());
    if header.iter().ne(want.iter().map(String::as_str)) {
        return Err(Error::Data(format!(
            "{}: header must be {}",
            path.display(),
            want.join(" ")
        )));
    }
    let mut d = FeatureDataset::new(provenance);
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(Error::csv(path))?;
        let line = i + 2;
        let bad = |field: &str, message: String| Error::Record {
            path: path.to_path_buf(),
            line,
            field: field.to_string(),
            message,
        };
        let index: usize = row[1].parse().map_err(|e| bad("token_index", format!("{e}")))?;
        let mut v = TokenFeatures::default();
        for (g, f) in FEATURE_ORDER.iter().enumerate() {
            v.0[g] = row[3 + g].parse().map_err(|e| bad(f.name(), format!("{e}")))?;
        }
        let new_sentence = d.sentences.last().is_none_or(|s| s.sentence_id != row[0]);
        if new_sentence {
            d.sentences.push(SentenceFeatures {
                sentence_id: row[0].to_string(),
                words: Vec::new(),
                values: Vec::new(),
            });
        }
        let s = d.sentences.last_mut().expect("pushed above");
        if index != s.len() {
            return Err(bad("token_index", format!("expected {}, found {index}", s.len())));
        }
        s.words.push(row[2].to_string());
        s.values.push(v);
    }
    Ok(d)
}

pub fn write_standardizer(path: &Path, s: &Standardizer) -> Result<()> {
    write_json(path, s)
}

pub fn read_standardizer(path: &Path) -> Result<Standardizer> {
    read_json(path)
}

/// Tags per sentence and token from a `sentence_id, token_index, tag`
/// TSV, aligned with `d`. Every token of `d` needs exactly one tag.
pub fn read_pos_tags(path: &Path, d: &FeatureDataset) -> Result<Vec<Vec<String>>> {
    let mut r = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .from_path(path)
        .map_err(Error::csv(path))?;
    let mut tags: BTreeMap<(String, usize), String> = BTreeMap::new();
    for (i, row) in r.records().enumerate() {
        let row = row.map_err(Error::csv(path))?;
        let line = i + 2;
        if row.len() != 3 {
            return Err(Error::Record {
                path: path.to_path_buf(),
                line,
                field: String::from("row"),
                message: format!("expected 3 columns, found {}", row.len()),
            });
        }
        let index: usize = row[1].parse().map_err(|e| Error::Record {
            path: path.to_path_buf(),
            line,
            field: String::from("token_index"),
            message: format!("{e}"),
        })?;
        tags.insert((row[0].to_string(), index), row[2].to_string());
    }
    let mut out = Vec::with_capacity(d.sentences.len());
    for s in &d.sentences {
        let mut row = Vec::with_capacity(s.len());
        for i in 0..s.len() {
            let tag = tags
                .remove(&(s.sentence_id.clone(), i))
                .ok_or_else(|| Error::Data(format!("{}: no tag for {} token {i}", path.display(), s.sentence_id)))?;
            row.push(tag);
        }
        out.push(row);
    }
    // tags of sentences outside `d` are fine, stray indices inside it are not
    let ids: BTreeSet<&str> = d.sentences.iter().map(|s| s.sentence_id.as_str()).collect();
    if let Some((sid, i)) = tags.into_keys().find(|(sid, _)| ids.contains(sid.as_str())) {
        return Err(Error::Data(format!(
            "{}: tag for {sid} token {i} matches no token",
            path.display()
        )));
    }
    Ok(out)
}

/// `epoch, train_loss, val_accuracy, lr`.
pub fn write_history_csv(path: &Path, h: &TrainingHistory) -> Result<()> {
    let mut w = writer(path, b',')?;
    w.write_record(["epoch", "train_loss", "val_accuracy", "lr"])
        .map_err(Error::csv(path))?;
    for e in &h.epochs {
        w.write_record([
            e.epoch.to_string(),
            e.train_loss.to_string(),
            e.val_accuracy.to_string(),
            e.lr.to_string(),
        ])
        .map_err(Error::csv(path))?;
    }
    finish(w, path)
}

/// `model, dataset, feature, mean, std`, one row per feature.
pub fn write_per_feature_csv(path: &Path, reports: &[EvaluationReport]) -> Result<()> {
    let mut w = writer(path, b',')?;
    w.write_record(["model", "dataset", "feature", "mean", "std"])
        .map_err(Error::csv(path))?;
    for r in reports {
        for f in FEATURE_ORDER {
            let ms = r.per_feature.get(f);
            w.write_record([
                r.model.as_str(),
                r.dataset.as_str(),
                f.name(),
                &ms.mean.to_string(),
                &ms.std.to_string(),
            ])
            .map_err(Error::csv(path))?;
        }
    }
    finish(w, path)
}

/// `source, target, mae, delta`, one row per cell.
pub fn write_cross_csv(path: &Path, m: &CrossMatrix) -> Result<()> {
    let mut w = writer(path, b',')?;
    w.write_record(["source", "target", "mae", "delta"])
        .map_err(Error::csv(path))?;
    for (i, source) in m.labels.iter().enumerate() {
        for (j, target) in m.labels.iter().enumerate() {
            w.write_record([
                source.as_str(),
                target.as_str(),
                &m.errors[i][j].to_string(),
                &m.deltas[i][j].to_string(),
            ])
            .map_err(Error::csv(path))?;
        }
    }
    finish(w, path)
}

/// `series, fraction, n_sentences, mean, std`; the pretrained reference
/// is a row with series `pretrained` and fraction 0.
pub fn write_ablation_csv(path: &Path, c: &AblationCurve) -> Result<()> {
    let mut w = writer(path, b',')?;
    w.write_record(["series", "fraction", "n_sentences", "mean", "std"])
        .map_err(Error::csv(path))?;
    for p in &c.points {
        w.write_record([
            "fine-tuned",
            &p.fraction.to_string(),
            &p.n_sentences.to_string(),
            &p.accuracy.mean.to_string(),
            &p.accuracy.std.to_string(),
        ])
        .map_err(Error::csv(path))?;
    }
    if let Some(p) = c.pretrained {
        w.write_record(["pretrained", "0", "0", &p.mean.to_string(), &p.std.to_string()])
            .map_err(Error::csv(path))?;
    }
    finish(w, path)
}

/// `bin, series, mean, count`.
pub fn write_curves_csv(path: &Path, curves: &[BinnedCurve]) -> Result<()> {
    let mut w = writer(path, b',')?;
    w.write_record(["bin", "series", "mean", "count"])
        .map_err(Error::csv(path))?;
    for c in curves {
        for p in &c.points {
            w.write_record([
                &p.bin.to_string(),
                c.series.as_str(),
                &p.mean.to_string(),
                &p.count.to_string(),
            ])
            .map_err(Error::csv(path))?;
        }
    }
    finish(w, path)
}

/// `tag, mean, count, accuracy` (accuracy blank without predictions).
pub fn write_pos_csv(path: &Path, groups: &[TagGroup]) -> Result<()> {
    let mut w = writer(path, b',')?;
    w.write_record(["tag", "mean", "count", "accuracy"])
        .map_err(Error::csv(path))?;
    for g in groups {
        w.write_record([
            g.tag.as_str(),
            &g.mean.to_string(),
            &g.count.to_string(),
            &g.accuracy.map(|a| a.to_string()).unwrap_or_default(),
        ])
        .map_err(Error::csv(path))?;
    }
    finish(w, path)
}

/// Writes `text` to `path`, or to stdout when `path` is `None`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(Error::io(p)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(Error::io(Path::new("<stdout>")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gazekit_core::features::FeatureRange;

    fn dataset() -> FeatureDataset {
        FeatureDataset {
            provenance: Provenance::default(),
            sentences: vec![
                SentenceFeatures {
                    sentence_id: "s1".into(),
                    words: vec!["Mary".into(), "had".into()],
                    values: vec![
                        TokenFeatures([2.0, 233.0, 233.0, 431.0, 215.5, 1.0, 1.0, 1.0]),
                        TokenFeatures::default(),
                    ],
                },
                SentenceFeatures {
                    sentence_id: "s2".into(),
                    words: vec!["a,\"quoted\"".into()],
                    values: vec![TokenFeatures([0.1; 8])],
                },
            ],
        }
    }

    #[test]
    fn features_tsv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.tsv");
        write_features_tsv(&p, &dataset()).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(
            text.starts_with("sentence_id\ttoken_index\tsurface\tnFix\tFFD\tFPD\tTRT\tMFD\tfProp\tnRefix\treProp\n")
        );
        assert!(text.contains("s1\t0\tMary\t2\t233\t233\t431\t215.5\t1\t1\t1\n"));
        assert_eq!(read_features_tsv(&p, Provenance::default()).unwrap(), dataset());
    }

    #[test]
    fn standardizer_json_layout() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.json");
        let s = Standardizer::from_ranges([FeatureRange { min: 0.0, max: 200.0 }; 8]).unwrap();
        write_standardizer(&p, &s).unwrap();
        let v: serde_json::Value = read_json(&p).unwrap();
        assert_eq!(v["TRT"]["max"], 200.0);
        assert_eq!(v.as_object().unwrap().len(), 8);
        assert_eq!(read_standardizer(&p).unwrap(), s);
    }

    #[test]
    fn pos_tags_align_or_fail() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.tsv");
        std::fs::write(
            &p,
            "sentence_id\ttoken_index\ttag\ns1\t1\tVERB\ns1\t0\tPROPN\ns2\t0\tPUNCT\n",
        )
        .unwrap();
        let tags = read_pos_tags(&p, &dataset()).unwrap();
        assert_eq!(
            tags,
            vec![vec!["PROPN".to_string(), "VERB".into()], vec!["PUNCT".into()]]
        );
        std::fs::write(&p, "sentence_id\ttoken_index\ttag\ns1\t0\tPROPN\n").unwrap();
        assert!(read_pos_tags(&p, &dataset()).is_err());
    }
}
