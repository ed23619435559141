use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::evaluation::SentencePrediction;
use crate::features::{Feature, FeatureDataset};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagGroup {
    pub tag: String,
    pub mean: f64,
    pub count: usize,
    /// `100 − MAE` of the predictions for this tag, when given.
    pub accuracy: Option<f64>,
}

/// Mean of `feature` per part-of-speech tag. `tags[s][w]` tags word `w` of
/// sentence `s`; tags are supplied by an external tagger.
pub fn pos_aggregation(
    d: &FeatureDataset,
    tags: &[Vec<String>],
    feature: Feature,
    predictions: Option<&[SentencePrediction]>,
) -> Result<Vec<TagGroup>> {
    if tags.len() != d.sentences.len() {
        return Err(Error::LengthMismatch(format!(
            "{} sentences, {} tag rows",
            d.sentences.len(),
            tags.len()
        )));
    }
    if let Some(p) = predictions {
        if p.len() != d.sentences.len() {
            return Err(Error::LengthMismatch(format!(
                "{} sentences, {} predictions",
                d.sentences.len(),
                p.len()
            )));
        }
    }
    // tag -> (sum, count, abs error sum, scored count)
    let mut groups: BTreeMap<&str, (f64, usize, f64, usize)> = BTreeMap::new();
    for (i, (s, row)) in d.sentences.iter().zip(tags).enumerate() {
        if row.len() != s.len() {
            return Err(Error::LengthMismatch(format!(
                "sentence {}: {} tokens, {} tags",
                s.sentence_id,
                s.len(),
                row.len()
            )));
        }
        let pred = predictions.map(|p| &p[i]);
        for (w, (tag, v)) in row.iter().zip(&s.values).enumerate() {
            let g = groups.entry(tag.as_str()).or_default();
            g.0 += v[feature];
            g.1 += 1;
            if let Some(p) = pred {
                if p.mask.get(w) == Some(&true) {
                    g.2 += libm::fabs(p.values[w][feature] - v[feature]);
                    g.3 += 1;
                }
            }
        }
    }
    Ok(groups
        .into_iter()
        .map(|(tag, (sum, count, err, scored))| TagGroup {
            tag: String::from(tag),
            mean: sum / count as f64,
            count,
            accuracy: (predictions.is_some() && scored > 0).then(|| 100.0 - err / scored as f64),
        })
        .collect())
}
