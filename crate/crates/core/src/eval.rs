//! Ranking under a learned metric: query ranking, k-NN label regression,
//! mean absolute error and distance profiles.

use std::cmp::Ordering;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::ldmlr::PsdMetric;
use crate::learner::LinearMetric;
use crate::linalg::{sq_dist, Matrix};
use crate::scalar::Scalar;

/// A metric realised as a linear map into a space where it is Euclidean.
pub trait DistanceMetric<T: Scalar> {
    /// Dimension of the points the metric accepts.
    fn input_dim(&self) -> usize;

    /// Image of `x`; distances between images equal metric distances.
    fn embed(&self, x: &[T]) -> Result<Vec<T>>;

    fn embed_all(&self, points: &Matrix<T>) -> Result<Matrix<T>> {
        if points.cols() != self.input_dim() {
            return Err(Error::invalid(format!(
                "points have dimension {}, metric expects {}",
                points.cols(),
                self.input_dim()
            )));
        }
        let rows = points
            .row_iter()
            .map(|r| self.embed(r))
            .collect::<Result<Vec<_>>>()?;
        if rows.is_empty() {
            return Ok(Matrix::zeros(0, 0));
        }
        Matrix::from_rows(&rows)
    }
}

/// Plain Euclidean distance in `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Euclidean {
    pub dim: usize,
}

impl<T: Scalar> DistanceMetric<T> for Euclidean {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(x.len(), self.dim)?;
        Ok(x.to_vec())
    }
}

impl<T: Scalar> DistanceMetric<T> for LinearMetric<T> {
    fn input_dim(&self) -> usize {
        self.d()
    }

    fn embed(&self, x: &[T]) -> Result<Vec<T>> {
        self.project(x)
    }
}

impl<T: Scalar> DistanceMetric<T> for PsdMetric<T> {
    fn input_dim(&self) -> usize {
        self.dim()
    }

    fn embed(&self, x: &[T]) -> Result<Vec<T>> {
        check_dim(x.len(), self.dim())?;
        self.factor().mul_vec(x)
    }
}

impl<T: Scalar, M: DistanceMetric<T> + ?Sized> DistanceMetric<T> for &M {
    fn input_dim(&self) -> usize {
        (**self).input_dim()
    }

    fn embed(&self, x: &[T]) -> Result<Vec<T>> {
        (**self).embed(x)
    }
}

fn check_dim(got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::invalid(format!(
            "point has dimension {got}, metric expects {want}"
        )));
    }
    Ok(())
}

/// Distance between `x` and `y` under `metric`.
pub fn metric_distance<T: Scalar, M: DistanceMetric<T>>(metric: &M, x: &[T], y: &[T]) -> Result<T> {
    Ok(sq_dist(&metric.embed(x)?, &metric.embed(y)?).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedSample<T> {
    pub index: usize,
    pub distance: T,
}

/// Every training sample ordered by distance to a query.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingResult<T> {
    pub entries: Vec<RankedSample<T>>,
}

impl<T: Scalar> RankingResult<T> {
    pub fn indices(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.index).collect()
    }
}

/// Training samples mapped through a metric once, for repeated queries.
pub struct RankingIndex<'a, T, M> {
    metric: M,
    data: &'a LabeledDataset<T>,
    embedded: Matrix<T>,
}

impl<'a, T: Scalar, M: DistanceMetric<T>> RankingIndex<'a, T, M> {
    pub fn new(metric: M, data: &'a LabeledDataset<T>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("training set is empty"));
        }
        let embedded = metric.embed_all(data.features())?;
        Ok(Self {
            metric,
            data,
            embedded,
        })
    }

    fn sorted(&self, query: &[T]) -> Result<Vec<RankedSample<T>>> {
        let q = self.metric.embed(query)?;
        let mut entries: Vec<RankedSample<T>> = self
            .embedded
            .row_iter()
            .enumerate()
            .map(|(index, p)| RankedSample {
                index,
                distance: sq_dist(&q, p).sqrt(),
            })
            .collect();
        entries.sort_by(|a, b| {
            a.distance
                .partial_cmp(&b.distance)
                .unwrap_or(Ordering::Equal)
                .then(a.index.cmp(&b.index))
        });
        Ok(entries)
    }

    pub fn rank(&self, query: &[T]) -> Result<RankingResult<T>> {
        Ok(RankingResult {
            entries: self.sorted(query)?,
        })
    }

    /// Mean label of the `k` nearest samples.
    pub fn predict(&self, query: &[T], k: usize) -> Result<T> {
        let n = self.data.len();
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "k = {k} must satisfy 1 <= k <= n = {n}"
            )));
        }
        let ranked = self.sorted(query)?;
        let labels = self.data.labels();
        let sum: T = ranked[..k].iter().map(|e| labels[e.index]).sum();
        Ok(sum / T::from_usize_lossy(k))
    }

    pub fn predict_all(&self, queries: &Matrix<T>, k: usize) -> Result<Vec<T>> {
        queries.row_iter().map(|q| self.predict(q, k)).collect()
    }
}

/// Training samples sorted by distance to `query` (ties by index).
pub fn rank_query<T: Scalar, M: DistanceMetric<T>>(
    metric: &M,
    query: &[T],
    data: &LabeledDataset<T>,
) -> Result<RankingResult<T>> {
    RankingIndex::new(metric, data)?.rank(query)
}

/// k-nearest-neighbour regression: unweighted mean label of the `k` nearest.
pub fn knn_predict<T: Scalar, M: DistanceMetric<T>>(
    metric: &M,
    query: &[T],
    data: &LabeledDataset<T>,
    k: usize,
) -> Result<T> {
    RankingIndex::new(metric, data)?.predict(query, k)
}

pub fn mae<T: Scalar>(predicted: &[T], truth: &[T]) -> Result<T> {
    if predicted.len() != truth.len() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::invalid("MAE of an empty set"));
    }
    let total: T = predicted
        .iter()
        .zip(truth)
        .map(|(&p, &t)| (p - t).abs())
        .sum();
    Ok(total / T::from_usize_lossy(predicted.len()))
}

/// Distance from every sample to the sample at `anchor`.
pub fn layering_profile<T: Scalar, M: DistanceMetric<T>>(
    metric: &M,
    data: &LabeledDataset<T>,
    anchor: usize,
) -> Result<Vec<T>> {
    if anchor >= data.len() {
        return Err(Error::invalid(format!(
            "anchor {anchor} out of range for {} samples",
            data.len()
        )));
    }
    let embedded = metric.embed_all(data.features())?;
    let a = embedded.row(anchor);
    Ok(embedded.row_iter().map(|p| sq_dist(p, a).sqrt()).collect())
}

/// Aggregate of repeated evaluation trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalReport {
    pub mae: f64,
    pub std: f64,
    pub wall_time_s: f64,
    pub trials: usize,
}

impl EvalReport {
    /// Mean and population standard deviation of per-trial MAEs, with the
    /// mean per-trial wall time.
    pub fn from_trials(maes: &[f64], seconds: &[f64]) -> Result<Self> {
        if maes.is_empty() || maes.len() != seconds.len() {
            return Err(Error::invalid(
                "need one wall time per trial and at least one trial",
            ));
        }
        let n = maes.len() as f64;
        let mean = maes.iter().sum::<f64>() / n;
        let var = maes.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / n;
        Ok(Self {
            mae: mean,
            std: var.sqrt(),
            wall_time_s: seconds.iter().sum::<f64>() / n,
            trials: maes.len(),
        })
    }
}

/// Average ranks (1-based, ties share the mean rank).
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(Ordering::Equal));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation (Pearson correlation of average ranks).
/// Returns 0 when either side is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::invalid(
            "Spearman correlation needs two equal-length samples of size >= 2",
        ));
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - ma) * (y - mb);
        va += (x - ma).powi(2);
        vb += (y - mb).powi(2);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(0.0);
    }
    Ok(cov / (va * vb).sqrt())
}
