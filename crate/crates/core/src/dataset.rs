//! Labelled samples with ordinal labels.

use std::cmp::Ordering;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// `n` feature vectors in `R^d` (one per row) with real ordinal labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset<T> {
    features: Matrix<T>,
    labels: Vec<T>,
}

/// A maximal run of equal labels in a grouped dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelGroup<T> {
    pub label: T,
    pub range: Range<usize>,
}

impl<T: Scalar> LabeledDataset<T> {
    pub fn new(features: Matrix<T>, labels: Vec<T>) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::invalid(format!(
                "{} feature rows but {} labels",
                features.rows(),
                labels.len()
            )));
        }
        if let Some(i) = labels.iter().position(|l| !l.is_finite()) {
            return Err(Error::invalid(format!("label at row {i} is not finite")));
        }
        if !features.is_finite() {
            return Err(Error::invalid("features contain non-finite values"));
        }
        Ok(Self { features, labels })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    #[inline]
    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    #[inline]
    pub fn labels(&self) -> &[T] {
        &self.labels
    }

    #[inline]
    pub fn sample(&self, i: usize) -> &[T] {
        self.features.row(i)
    }

    pub fn into_parts(self) -> (Matrix<T>, Vec<T>) {
        (self.features, self.labels)
    }

    /// Rows reordered so equal labels are contiguous and ascending; the
    /// sort is stable, so original order is kept within a group.
    pub fn grouped(&self) -> Self {
        let order = self.grouping_order();
        self.select(&order)
    }

    pub(crate) fn grouping_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| cmp_labels(self.labels[a], self.labels[b]));
        order
    }

    pub fn is_grouped(&self) -> bool {
        self.labels
            .windows(2)
            .all(|w| cmp_labels(w[0], w[1]) != Ordering::Greater)
    }

    pub fn select(&self, idx: &[usize]) -> Self {
        Self {
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// Distinct labels in ascending order.
    pub fn distinct_labels(&self) -> Vec<T> {
        distinct_sorted(&self.labels)
    }

    /// Label groups of a grouped dataset, in row order.
    pub fn groups(&self) -> Result<Vec<LabelGroup<T>>> {
        if !self.is_grouped() {
            return Err(Error::invalid("dataset is not grouped by label"));
        }
        let mut out: Vec<LabelGroup<T>> = Vec::new();
        for (i, &l) in self.labels.iter().enumerate() {
            match out.last_mut() {
                Some(g) if g.label == l => g.range.end = i + 1,
                _ => out.push(LabelGroup {
                    label: l,
                    range: i..i + 1,
                }),
            }
        }
        Ok(out)
    }

    /// Subtracts the feature mean; returns the centred dataset and the mean.
    pub fn centered(&self) -> (Self, Vec<T>) {
        let offset = self.features.column_means();
        let features = self
            .features
            .sub_row_vector(&offset)
            .expect("offset length matches");
        (
            Self {
                features,
                labels: self.labels.clone(),
            },
            offset,
        )
    }

    pub fn with_features(&self, features: Matrix<T>) -> Result<Self> {
        Self::new(features, self.labels.clone())
    }
}

pub(crate) fn cmp_labels<T: Scalar>(a: T, b: T) -> Ordering {
    a.partial_cmp(&b).unwrap_or(Ordering::Equal)
}

pub(crate) fn distinct_sorted<T: Scalar>(labels: &[T]) -> Vec<T> {
    let mut v = labels.to_vec();
    v.sort_by(|&a, &b| cmp_labels(a, b));
    v.dedup();
    v
}
