//! Seeded per-label train/test splitting.
//!
//! Randomness comes from SplitMix64 (64-bit state, fixed algorithm), so a
//! seed gives the same split on every platform.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub per_label_train_count: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(per_label_train_count: usize, seed: u64) -> Self {
        Self {
            per_label_train_count,
            seed,
        }
    }
}

/// Row indices of the train and test parts, each ascending.
pub fn split_indices<T: Scalar>(
    data: &LabeledDataset<T>,
    spec: SplitSpec,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if spec.per_label_train_count == 0 {
        return Err(Error::invalid("per-label training count must be >= 1"));
    }
    let order = data.grouping_order();
    let labels = data.labels();
    let mut rng = SplitMix64::seed_from_u64(spec.seed);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for group in order.chunk_by(|&a, &b| labels[a] == labels[b]) {
        let want = spec.per_label_train_count;
        if want > group.len() {
            return Err(Error::invalid(format!(
                "label {} has {} samples, fewer than the {want} requested for training",
                labels[group[0]],
                group.len()
            )));
        }
        let mut g = group.to_vec();
        let (picked, rest) = g.partial_shuffle(&mut rng, want);
        train.extend_from_slice(picked);
        test.extend_from_slice(rest);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Train and test datasets, both grouped by label.
pub fn split<T: Scalar>(
    data: &LabeledDataset<T>,
    spec: SplitSpec,
) -> Result<(LabeledDataset<T>, LabeledDataset<T>)> {
    let (train, test) = split_indices(data, spec)?;
    Ok((data.select(&train).grouped(), data.select(&test).grouped()))
}
