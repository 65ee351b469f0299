//! Target-neighbour search: for each sample, its `K` nearest same-label
//! samples under Euclidean distance.

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::sq_dist;
use crate::scalar::Scalar;

/// Ordered pairs `(i, j)` where `j` is a target neighbour of `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborGraph {
    pairs: Vec<(usize, usize)>,
    k: usize,
}

impl NeighborGraph {
    /// Builds a graph from explicit pairs. Pairs are not checked against a
    /// dataset; [`find_target_neighbors`] is the usual constructor.
    pub fn from_pairs(pairs: Vec<(usize, usize)>, k: usize) -> Self {
        Self { pairs, k }
    }

    pub fn empty(k: usize) -> Self {
        Self {
            pairs: Vec::new(),
            k,
        }
    }

    #[inline]
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    #[inline]
    pub fn k(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }

    /// Largest index referenced by any pair, plus one.
    pub(crate) fn index_bound(&self) -> usize {
        self.pairs
            .iter()
            .map(|&(i, j)| i.max(j) + 1)
            .max()
            .unwrap_or(0)
    }
}

/// Each sample gets the `k` nearest samples with the same label (all of
/// them when fewer exist). Ties in distance go to the lower index.
pub fn find_target_neighbors<T: Scalar>(
    data: &LabeledDataset<T>,
    k: usize,
) -> Result<NeighborGraph> {
    if k == 0 {
        return Err(Error::invalid("number of target neighbours K must be >= 1"));
    }
    let n = data.len();
    let labels = data.labels();
    let mut pairs = Vec::with_capacity(n * k);
    let mut candidates: Vec<(T, usize)> = Vec::new();
    for i in 0..n {
        candidates.clear();
        candidates.extend(
            (0..n)
                .filter(|&j| j != i && labels[j] == labels[i])
                .map(|j| (sq_dist(data.sample(i), data.sample(j)), j)),
        );
        candidates.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        pairs.extend(candidates.iter().take(k).map(|&(_, j)| (i, j)));
    }
    Ok(NeighborGraph { pairs, k })
}
