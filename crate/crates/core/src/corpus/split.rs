use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.9,
            val: 0.05,
            test: 0.05,
        }
    }
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let r = Self { train, val, test };
        r.check()?;
        Ok(r)
    }

    fn check(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidRatios(format!("{parts:?} must all be positive")));
        }
        let sum: f64 = parts.iter().sum();
        if libm::fabs(sum - 1.0) > 1e-9 {
            return Err(Error::InvalidRatios(format!("{parts:?} sum to {sum}")));
        }
        Ok(())
    }

    /// Split sizes for `n` sentences: validation and test sizes are the
    /// rounded ratios (at least one sentence each), train takes the rest.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize)> {
        self.check()?;
        if n < 3 {
            return Err(Error::TooFewSentences { needed: 3, got: n });
        }
        let val = (libm::round(self.val * n as f64) as usize).max(1);
        let test = (libm::round(self.test * n as f64) as usize).max(1);
        if val + test >= n {
            return Err(Error::TooFewSentences {
                needed: val + test + 1,
                got: n,
            });
        }
        Ok((n - val - test, val, test))
    }
}

/// Seeded sentence-level partition into (train, validation, test).
///
/// Each sentence moves with all of its trials. Every split keeps the full
/// subject set. Within a split, sentences keep their original corpus order.
pub fn split_dataset(c: &Corpus, ratios: SplitRatios, seed: u64) -> Result<(Corpus, Corpus, Corpus)> {
    let (n_train, n_val, _) = ratios.sizes(c.sentences.len())?;
    let mut order: Vec<usize> = (0..c.sentences.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut train = order[..n_train].to_vec();
    let mut val = order[n_train..n_train + n_val].to_vec();
    let mut test = order[n_train + n_val..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();

    Ok((
        c.select(&train, format!("{}/train", c.name)),
        c.select(&val, format!("{}/val", c.name)),
        c.select(&test, format!("{}/test", c.name)),
    ))
}
