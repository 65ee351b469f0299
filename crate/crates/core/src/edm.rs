//! Euclidean distance matrices built from ordinal labels, and their
//! embedding by classical multidimensional scaling.
//!
//! For labels `r_1, …, r_n` and a shift `beta`, the label distance matrix is
//!
//! ```text
//! D_ij = (|r_i - r_j| + beta)²   if r_i ≠ r_j,   0 otherwise.
//! ```
//!
//! `D` collapses every label group onto one point, so it is a Euclidean
//! distance matrix (EDM) exactly when the `m × m` group matrix
//! `Δ_ij = (|a_i - a_j| + beta)²` over the distinct labels `a_t` is one. `Δ`
//! is guaranteed to be an EDM once `beta ≥ -4 μ₀`, where `μ₀` is the smallest
//! eigenvalue of `-½ J (|a_i - a_j|) J` (see [`min_beta`]).
//!
//! Embedding follows the Schoenberg characterisation: a hollow symmetric
//! matrix is an EDM iff `B(D) = -½ J D J` is positive semidefinite, and the
//! points `√λ_k p_k` built from the top eigenpairs of `B(D)` reproduce `D`.

use crate::dataset::{cmp_labels, distinct_sorted};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricEigen};
use crate::scalar::Scalar;

/// Symmetric, hollow, entrywise non-negative matrix of squared
/// dissimilarities. It is a candidate EDM; [`is_edm`] decides.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDistanceMatrix<T> {
    entries: Matrix<T>,
}

impl<T: Scalar> SquaredDistanceMatrix<T> {
    /// Validates symmetry (to a few ulps of the largest entry), a zero
    /// diagonal and non-negativity.
    pub fn new(entries: Matrix<T>) -> Result<Self> {
        if !entries.is_square() || entries.rows() == 0 {
            return Err(Error::invalid(format!(
                "squared distance matrix must be square and non-empty, got {}x{}",
                entries.rows(),
                entries.cols()
            )));
        }
        if !entries.is_finite() {
            return Err(Error::invalid(
                "squared distance matrix has non-finite entries",
            ));
        }
        let tol = T::lit(64.0) * T::epsilon() * entries.max_abs().max(T::one());
        let n = entries.rows();
        for i in 0..n {
            if entries[(i, i)] != T::zero() {
                return Err(Error::invalid(format!("diagonal entry {i} is non-zero")));
            }
            for j in 0..n {
                let v = entries[(i, j)];
                if v < T::zero() {
                    return Err(Error::invalid(format!("entry ({i},{j}) = {v} is negative")));
                }
                if (v - entries[(j, i)]).abs() > tol {
                    return Err(Error::invalid(format!("matrix is asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self {
            entries: entries.symmetrized(),
        })
    }

    /// Pairwise squared distances of the rows of `points`.
    pub fn from_points(points: &Matrix<T>) -> Result<Self> {
        Self::new(points.pairwise_sq_distances())
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.entries.rows()
    }

    #[inline]
    pub fn entries(&self) -> &Matrix<T> {
        &self.entries
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.entries[(i, j)]
    }

    /// `B(D) = -½ J D J`, computed as `-½ (D_ij - r_i - r_j + g)` with row
    /// means `r` and grand mean `g`.
    pub fn double_centered(&self) -> Matrix<T> {
        let n = self.order();
        let means = self.entries.column_means(); // symmetric: row means = column means
        let grand = means.iter().copied().sum::<T>() / T::from_usize_lossy(n);
        let half = T::lit(-0.5);
        let mut b = Matrix::from_fn(n, n, |i, j| {
            half * (self.entries[(i, j)] - means[i] - means[j] + grand)
        });
        b = b.symmetrized();
        b
    }
}

/// Centred points, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet<T> {
    points: Matrix<T>,
}

impl<T: Scalar> EmbeddingSet<T> {
    /// Wraps `points`, re-centring them so that column sums vanish.
    pub fn from_points(points: Matrix<T>) -> Self {
        let mean = points.column_means();
        Self {
            points: points
                .sub_row_vector(&mean)
                .expect("mean has matching length"),
        }
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.points.rows()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.points.cols()
    }

    #[inline]
    pub fn points(&self) -> &Matrix<T> {
        &self.points
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[T] {
        self.points.row(i)
    }

    pub fn into_points(self) -> Matrix<T> {
        self.points
    }

    pub fn pairwise_sq_distances(&self) -> Matrix<T> {
        self.points.pairwise_sq_distances()
    }
}

/// Smallest eigenvalue `μ₀` of `-½ J Δ̄^{1/2} J` and the induced lower bound
/// `min_beta = -4 μ₀` on the label shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaBound<T> {
    pub mu0: T,
    pub min_beta: T,
}

impl<T: Scalar> BetaBound<T> {
    pub fn from_mu0(mu0: T) -> Self {
        Self {
            mu0,
            min_beta: T::zero() - T::lit(4.0) * mu0,
        }
    }

    /// True when `beta` is admissible, allowing for rounding in `μ₀`.
    pub fn admits(&self, beta: T) -> bool {
        let slack = T::default_tolerance() * (T::one() + self.min_beta.abs());
        beta >= self.min_beta - slack
    }
}

/// `J = I - (1/n) 𝟙𝟙ᵀ`.
pub fn centering_matrix<T: Scalar>(n: usize) -> Result<Matrix<T>> {
    if n == 0 {
        return Err(Error::invalid("centering matrix needs n >= 1"));
    }
    let inv = T::one() / T::from_usize_lossy(n);
    Ok(Matrix::from_fn(n, n, |i, j| {
        if i == j {
            T::one() - inv
        } else {
            -inv
        }
    }))
}

/// Label-derived squared distance matrix: `(|r_i - r_j| + beta)²` for
/// distinct labels and `0` for equal ones.
pub fn build_label_edm<T: Scalar>(labels: &[T], beta: T) -> Result<SquaredDistanceMatrix<T>> {
    if labels.is_empty() {
        return Err(Error::invalid("at least one label is required"));
    }
    if labels.iter().any(|l| !l.is_finite()) || !beta.is_finite() {
        return Err(Error::invalid("labels and beta must be finite"));
    }
    let n = labels.len();
    let d = Matrix::from_fn(n, n, |i, j| shifted_sq_gap(labels[i], labels[j], beta));
    SquaredDistanceMatrix::new(d)
}

/// Group matrix `Δ` over pairwise-distinct labels.
pub fn build_group_edm<T: Scalar>(
    distinct_labels: &[T],
    beta: T,
) -> Result<SquaredDistanceMatrix<T>> {
    ensure_distinct(distinct_labels)?;
    build_label_edm(distinct_labels, beta)
}

#[inline]
fn shifted_sq_gap<T: Scalar>(a: T, b: T, beta: T) -> T {
    if a == b {
        T::zero()
    } else {
        let g = (a - b).abs() + beta;
        g * g
    }
}

fn ensure_distinct<T: Scalar>(labels: &[T]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::invalid("at least one label is required"));
    }
    let mut sorted = labels.to_vec();
    sorted.sort_by(|&a, &b| cmp_labels(a, b));
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::invalid(format!("label {} is repeated", w[0])));
    }
    Ok(())
}

/// Admissible lower bound on `beta` for the given distinct labels.
pub fn min_beta<T: Scalar>(distinct_labels: &[T]) -> Result<BetaBound<T>> {
    ensure_distinct(distinct_labels)?;
    let m = distinct_labels.len();
    // Δ̄^{1/2} = (|a_i - a_j|), which is hollow, symmetric and non-negative.
    let gaps = Matrix::from_fn(m, m, |i, j| (distinct_labels[i] - distinct_labels[j]).abs());
    let b = SquaredDistanceMatrix::new(gaps)?.double_centered();
    let eig = SymmetricEigen::new(&b)?;
    let mut mu0 = eig.min_value().unwrap_or_else(T::zero);
    // Values within rounding of zero are zero.
    if mu0.abs() <= T::lit(64.0) * T::epsilon() * eig.max_abs_value().max(T::one()) {
        mu0 = T::zero();
    }
    Ok(BetaBound::from_mu0(mu0))
}

/// Schoenberg test: `true` iff the smallest eigenvalue of `B(D)` is at least
/// `-tol · (1 + max |λ|)`.
pub fn is_edm<T: Scalar>(d: &SquaredDistanceMatrix<T>, tol: T) -> Result<bool> {
    if !(tol > T::zero()) {
        return Err(Error::invalid("tolerance must be positive"));
    }
    let eig = SymmetricEigen::new(&d.double_centered())?;
    Ok(passes_schoenberg(&eig, tol))
}

fn passes_schoenberg<T: Scalar>(eig: &SymmetricEigen<T>, tol: T) -> bool {
    let lo = eig.min_value().unwrap_or_else(T::zero);
    lo >= -tol * (T::one() + eig.max_abs_value())
}

/// Classical MDS of `d` into `s` dimensions.
///
/// Coordinates come from the top-`s` eigenpairs of `B(D)` as `√λ_k p_k`;
/// eigenvalues at or below `1e-10 · λ_max` count as zero and their
/// coordinates are zero-padded. Fails with [`Error::NotEdm`] when `B(D)` has
/// a negative eigenvalue beyond the default relative tolerance.
pub fn cmds_embed<T: Scalar>(d: &SquaredDistanceMatrix<T>, s: usize) -> Result<EmbeddingSet<T>> {
    let n = d.order();
    if s == 0 || s + 1 > n {
        return Err(Error::invalid(format!(
            "embedding dimension s = {s} must satisfy 1 <= s <= n - 1 = {}",
            n.saturating_sub(1)
        )));
    }
    classical_mds(d, s)
}

/// Unchecked-dimension variant: any `s` is allowed and surplus coordinates
/// are zero.
pub(crate) fn classical_mds<T: Scalar>(
    d: &SquaredDistanceMatrix<T>,
    s: usize,
) -> Result<EmbeddingSet<T>> {
    let n = d.order();
    let eig = SymmetricEigen::new(&d.double_centered())?;
    if !passes_schoenberg(&eig, T::default_tolerance()) {
        return Err(Error::NotEdm {
            min_eigenvalue: eig.min_value().unwrap_or_else(T::zero).as_f64(),
        });
    }
    let lambda_max = eig.values.first().copied().unwrap_or_else(T::zero);
    let cutoff = T::spectral_cutoff() * lambda_max;
    let mut points = Matrix::zeros(n, s);
    for k in 0..s.min(n) {
        let lambda = eig.values[k];
        if !(lambda > cutoff) || lambda <= T::zero() {
            break;
        }
        let scale = lambda.sqrt();
        for i in 0..n {
            points[(i, k)] = scale * eig.vectors[(i, k)];
        }
    }
    Ok(EmbeddingSet::from_points(points))
}

/// Embedding of the label matrix through the `m × m` group matrix.
///
/// Runs cMDS on `Δ` (cost governed by the number of distinct labels, not by
/// `n`), copies each group point to every sample carrying that label,
/// zero-pads (or truncates to the top components) to `s` coordinates and
/// subtracts the mean point. Labels need not be sorted.
pub fn embed_labels<T: Scalar>(labels: &[T], beta: T, s: usize) -> Result<EmbeddingSet<T>> {
    if s == 0 {
        return Err(Error::invalid("embedding dimension must be at least 1"));
    }
    if labels.is_empty() {
        return Err(Error::invalid("at least one label is required"));
    }
    let distinct = distinct_sorted(labels);
    let bound = min_beta(&distinct)?;
    if !bound.admits(beta) {
        return Err(Error::BetaBelowBound {
            beta: beta.as_f64(),
            min_beta: bound.min_beta.as_f64(),
            mu0: bound.mu0.as_f64(),
        });
    }
    let delta = build_group_edm(&distinct, beta)?;
    let group_points = classical_mds(&delta, s)?;

    let n = labels.len();
    let mut points = Matrix::zeros(n, s);
    for (i, &l) in labels.iter().enumerate() {
        let t = distinct
            .binary_search_by(|&a| cmp_labels(a, l))
            .expect("label present in distinct set");
        points.row_mut(i).copy_from_slice(group_points.point(t));
    }
    Ok(EmbeddingSet::from_points(points))
}
