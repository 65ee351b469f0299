//! Centring and PCA (centred, unscaled).

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricEigen};
use crate::scalar::Scalar;

/// Subtracts the feature mean. The returned offset is what [`LinearMetric`]
/// stores as `center_offset`.
///
/// [`LinearMetric`]: crate::learner::LinearMetric
pub fn center<T: Scalar>(data: &LabeledDataset<T>) -> Result<(LabeledDataset<T>, Vec<T>)> {
    if data.is_empty() {
        return Err(Error::invalid("cannot centre an empty dataset"));
    }
    Ok(data.centered())
}

/// Projection onto the leading principal directions of a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel<T> {
    mean: Vec<T>,
    /// `d' x d`, orthonormal rows ordered by decreasing variance.
    components: Matrix<T>,
    variances: Vec<T>,
}

impl<T: Scalar> PcaModel<T> {
    pub fn mean(&self) -> &[T] {
        &self.mean
    }

    pub fn components(&self) -> &Matrix<T> {
        &self.components
    }

    /// Sample variance along each component.
    pub fn variances(&self) -> &[T] {
        &self.variances
    }

    pub fn input_dim(&self) -> usize {
        self.components.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.components.rows()
    }

    /// `(x - mean) * components^T` for every row.
    pub fn apply(&self, points: &Matrix<T>) -> Result<Matrix<T>> {
        points
            .sub_row_vector(&self.mean)?
            .matmul_transpose(&self.components)
    }

    pub fn apply_dataset(&self, data: &LabeledDataset<T>) -> Result<LabeledDataset<T>> {
        data.with_features(self.apply(data.features())?)
    }
}

/// Top `d_target` eigenvectors of the sample covariance (divisor `n - 1`),
/// with the eigensolver's sign convention.
pub fn fit_pca<T: Scalar>(data: &LabeledDataset<T>, d_target: usize) -> Result<PcaModel<T>> {
    let (n, d) = (data.len(), data.dim());
    if n < 2 || d_target == 0 || d_target > d.min(n - 1) {
        return Err(Error::invalid(format!(
            "PCA dimension {d_target} must satisfy 1 <= d' <= min(n - 1, d) = {}",
            d.min(n.saturating_sub(1))
        )));
    }
    let mean = data.features().column_means();
    let xc = data.features().sub_row_vector(&mean)?;
    let cov = xc
        .transpose()
        .matmul(&xc)?
        .scaled(T::one() / T::from_usize_lossy(n - 1))
        .symmetrized();
    let eig = SymmetricEigen::new(&cov)?;
    let components = Matrix::from_fn(d_target, d, |k, j| eig.vectors[(j, k)]);
    let variances = eig.values[..d_target]
        .iter()
        .map(|&v| v.max(T::zero()))
        .collect();
    Ok(PcaModel {
        mean,
        components,
        variances,
    })
}

pub fn apply_pca<T: Scalar>(model: &PcaModel<T>, points: &Matrix<T>) -> Result<Matrix<T>> {
    model.apply(points)
}
