use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::de::{Deserializer, Error as _};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use super::{Feature, FeatureDataset, TokenFeatures, FEATURE_ORDER, N_FEATURES};
use crate::{Error, Result};

/// Upper end of the standardized range; the lower end is 0.
pub const TARGET_MAX: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    pub fn is_degenerate(&self) -> bool {
        self.max == self.min
    }
}

/// Independent min-max scaling of each feature onto `[0, 100]`.
///
/// Values outside the fitted range are clamped; degenerate features
/// (`max == min`) map to 0 and back to `min`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    ranges: [FeatureRange; N_FEATURES],
}

impl Standardizer {
    /// Per-feature min and max over every token of `train`.
    pub fn fit(train: &FeatureDataset) -> Result<Self> {
        let mut tokens = train.tokens().map(|(_, f)| f);
        let first = tokens.next().ok_or(Error::EmptyDataset)?;
        let mut ranges = first.0.map(|v| FeatureRange { min: v, max: v });
        for f in tokens {
            for (r, &v) in ranges.iter_mut().zip(f.0.iter()) {
                r.min = r.min.min(v);
                r.max = r.max.max(v);
            }
        }
        Ok(Self { ranges })
    }

    pub fn from_ranges(ranges: [FeatureRange; N_FEATURES]) -> Result<Self> {
        for (feature, r) in FEATURE_ORDER.iter().zip(ranges.iter()) {
            if !(r.min.is_finite() && r.max.is_finite()) || r.min > r.max {
                return Err(Error::InvalidRange {
                    feature: feature.name().to_string(),
                    min: r.min,
                    max: r.max,
                });
            }
        }
        Ok(Self { ranges })
    }

    pub fn range(&self, feature: Feature) -> FeatureRange {
        self.ranges[feature.column()]
    }

    pub fn ranges(&self) -> &[FeatureRange; N_FEATURES] {
        &self.ranges
    }

    pub fn degenerate_features(&self) -> Vec<Feature> {
        FEATURE_ORDER
            .iter()
            .copied()
            .filter(|f| self.range(*f).is_degenerate())
            .collect()
    }

    pub fn scale(&self, feature: Feature, x: f64) -> f64 {
        let r = self.range(feature);
        if r.is_degenerate() {
            return 0.0;
        }
        (TARGET_MAX * (x - r.min) / (r.max - r.min)).clamp(0.0, TARGET_MAX)
    }

    pub fn unscale(&self, feature: Feature, y: f64) -> f64 {
        let r = self.range(feature);
        r.min + y / TARGET_MAX * (r.max - r.min)
    }

    pub fn transform(&self, x: &TokenFeatures) -> TokenFeatures {
        let mut out = *x;
        for f in FEATURE_ORDER {
            out[f] = self.scale(f, x[f]);
        }
        out
    }

    pub fn inverse(&self, y: &TokenFeatures) -> TokenFeatures {
        let mut out = *y;
        for f in FEATURE_ORDER {
            out[f] = self.unscale(f, y[f]);
        }
        out
    }

    pub fn standardize(&self, d: &FeatureDataset) -> FeatureDataset {
        self.map(d, |x| self.transform(x))
    }

    pub fn destandardize(&self, d: &FeatureDataset) -> FeatureDataset {
        self.map(d, |y| self.inverse(y))
    }

    fn map(&self, d: &FeatureDataset, f: impl Fn(&TokenFeatures) -> TokenFeatures) -> FeatureDataset {
        let mut out = d.clone();
        for s in &mut out.sentences {
            for v in &mut s.values {
                *v = f(v);
            }
        }
        out
    }
}

impl Serialize for Standardizer {
    fn serialize<S: Serializer>(&self, serializer: S) -> core::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(N_FEATURES))?;
        for f in FEATURE_ORDER {
            map.serialize_entry(f.name(), &self.range(f))?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for Standardizer {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> core::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, FeatureRange>::deserialize(deserializer)?;
        let mut ranges = [FeatureRange { min: 0.0, max: 0.0 }; N_FEATURES];
        for f in FEATURE_ORDER {
            ranges[f.column()] = *map
                .get(f.name())
                .ok_or_else(|| D::Error::custom(Error::UnfittedStandardizer(f.name().to_string())))?;
        }
        if let Some(extra) = map.keys().find(|k| k.parse::<Feature>().is_err()) {
            return Err(D::Error::custom(Error::UnknownFeature(extra.clone())));
        }
        Standardizer::from_ranges(ranges).map_err(D::Error::custom)
    }
}

impl fmt::Display for Standardizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for feature in FEATURE_ORDER {
            let r = self.range(feature);
            writeln!(f, "{feature}\t{}\t{}", r.min, r.max)?;
        }
        Ok(())
    }
}
