//! Baseline: linear distance metric learning for ranking, solved by
//! projected gradient over the positive semidefinite cone.
//!
//! ```text
//! h(A) = −Σ_{i,j} ω_ij d²_A(x_i, x_j) + μ Σ_{(i,j) ∈ η} (d²_A(x_i, x_j) − ‖x_i − x_j‖²)²
//! ω_ij = (|r_i − r_j| + 1)^p  if r_i ≠ r_j, else 0
//! A ← Π_{S+}(A − t ∇h(A))
//! ```
//!
//! With `X_ij = (x_i − x_j)(x_i − x_j)ᵀ` the gradient is
//! `∇h(A) = −Σ ω_ij X_ij + 2μ Σ_η (d²_A − d²_I) X_ij`.

use std::time::Instant;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix, SymmetricEigen};
use crate::neighbors::{find_target_neighbors, NeighborGraph};
use crate::scalar::Scalar;

/// Symmetric positive semidefinite metric matrix `A`, stored together with a
/// factor `G` (`A = GᵀG`) used to map points into a Euclidean space.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdMetric<T> {
    a: Matrix<T>,
    factor: Matrix<T>,
}

impl<T: Scalar> PsdMetric<T> {
    /// Accepts a symmetric matrix whose smallest eigenvalue is at least
    /// `-sqrt(eps) · max(1, max |λ|)`.
    pub fn new(a: Matrix<T>) -> Result<Self> {
        let eig = SymmetricEigen::new(&a)?;
        let lo = eig.min_value().unwrap_or_else(T::zero);
        if lo < -T::default_tolerance() * eig.max_abs_value().max(T::one()) {
            return Err(Error::invalid(format!(
                "metric matrix is not positive semidefinite (smallest eigenvalue {lo:e})"
            )));
        }
        Ok(Self::from_eigen(a.symmetrized(), &eig))
    }

    fn from_eigen(a: Matrix<T>, eig: &SymmetricEigen<T>) -> Self {
        let d = eig.values.len();
        let factor = Matrix::from_fn(d, d, |k, j| {
            eig.values[k].max(T::zero()).sqrt() * eig.vectors[(j, k)]
        });
        Self { a, factor }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            a: Matrix::identity(d),
            factor: Matrix::identity(d),
        }
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix<T> {
        &self.a
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    /// `G x` with `GᵀG = A`.
    pub fn factor(&self) -> &Matrix<T> {
        &self.factor
    }

    /// `(x − y)ᵀ A (x − y)`.
    pub fn sq_distance(&self, x: &[T], y: &[T]) -> T {
        let v: Vec<T> = x.iter().zip(y).map(|(&a, &b)| a - b).collect();
        quad_form(&self.a, &v)
    }
}

/// Hyper-parameters of the projected-gradient loop.
#[derive(Debug, Clone, PartialEq)]
pub struct LdmlrConfig<T> {
    pub mu: T,
    /// Exponent of the ordinal weights.
    pub p: T,
    pub t_max: usize,
    pub k: usize,
    /// Gradient step; the classic update uses 1.
    pub step: T,
}

impl<T: Scalar> Default for LdmlrConfig<T> {
    fn default() -> Self {
        Self {
            mu: T::lit(1e3),
            p: T::one(),
            t_max: 30,
            k: 5,
            step: T::one(),
        }
    }
}

impl<T: Scalar> LdmlrConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.mu > T::zero()) || !self.mu.is_finite() {
            return Err(Error::invalid("mu must be positive"));
        }
        if !(self.p > T::zero()) || !self.p.is_finite() {
            return Err(Error::invalid("weight exponent p must be positive"));
        }
        if self.k == 0 {
            return Err(Error::invalid("K must be >= 1"));
        }
        if !(self.step > T::zero()) || !self.step.is_finite() {
            return Err(Error::invalid("step must be positive"));
        }
        Ok(())
    }
}

/// `(|r_i − r_j| + 1)^p` for different labels, `0` for equal ones.
pub fn ordinal_weight<T: Scalar>(ri: T, rj: T, p: T) -> T {
    if ri == rj {
        T::zero()
    } else {
        ((ri - rj).abs() + T::one()).powf(p)
    }
}

fn quad_form<T: Scalar>(a: &Matrix<T>, v: &[T]) -> T {
    a.row_iter().zip(v).map(|(row, &vi)| vi * dot(row, v)).sum()
}

/// Precomputed weighted scatter `S = Σ_{i,j} ω_ij X_ij` and neighbour
/// differences.
pub struct LdmlrProblem<T> {
    scatter: Matrix<T>,
    diffs: Vec<(Vec<T>, T)>,
    mu: T,
    dim: usize,
}

impl<T: Scalar> LdmlrProblem<T> {
    pub fn new(data: &LabeledDataset<T>, nbrs: &NeighborGraph, mu: T, p: T) -> Result<Self> {
        let n = data.len();
        let d = data.dim();
        if nbrs.index_bound() > n {
            return Err(Error::invalid("neighbour pair refers to a missing sample"));
        }
        let x = data.features();
        let labels = data.labels();

        // S = 2 Xᵀ (diag(W𝟙) − W) X over the symmetric weight matrix W.
        let mut lap_x = Matrix::zeros(n, d);
        for i in 0..n {
            for j in 0..n {
                let w = ordinal_weight(labels[i], labels[j], p);
                if w == T::zero() {
                    continue;
                }
                let (xi, xj) = (x.row(i), x.row(j));
                for (o, (&a, &b)) in lap_x.row_mut(i).iter_mut().zip(xi.iter().zip(xj)) {
                    *o += w * (a - b);
                }
            }
        }
        let two = T::lit(2.0);
        let mut scatter = Matrix::zeros(d, d);
        for i in 0..n {
            let (xi, li) = (x.row(i), lap_x.row(i));
            for a in 0..d {
                if xi[a] == T::zero() {
                    continue;
                }
                let row = scatter.row_mut(a);
                for (o, &lb) in row.iter_mut().zip(li) {
                    *o += two * xi[a] * lb;
                }
            }
        }
        let scatter = scatter.symmetrized();

        let diffs = nbrs
            .pairs()
            .iter()
            .map(|&(i, j)| {
                let v: Vec<T> = x
                    .row(i)
                    .iter()
                    .zip(x.row(j))
                    .map(|(&a, &b)| a - b)
                    .collect();
                let base = dot(&v, &v);
                (v, base)
            })
            .collect();
        Ok(Self {
            scatter,
            diffs,
            mu,
            dim: d,
        })
    }

    fn check(&self, a: &Matrix<T>) -> Result<()> {
        if a.shape() != (self.dim, self.dim) {
            return Err(Error::invalid(format!(
                "metric is {}x{}, data dimension is {}",
                a.rows(),
                a.cols(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn value(&self, a: &Matrix<T>) -> Result<T> {
        self.check(a)?;
        let spread: T = a
            .as_slice()
            .iter()
            .zip(self.scatter.as_slice())
            .map(|(&x, &y)| x * y)
            .sum();
        let local: T = self
            .diffs
            .iter()
            .map(|(v, base)| {
                let e = quad_form(a, v) - *base;
                e * e
            })
            .sum();
        Ok(-spread + self.mu * local)
    }

    /// Exactly symmetric gradient.
    pub fn gradient(&self, a: &Matrix<T>) -> Result<Matrix<T>> {
        self.check(a)?;
        let d = self.dim;
        let mut g = self.scatter.scaled(-T::one());
        let two_mu = T::lit(2.0) * self.mu;
        for (v, base) in &self.diffs {
            let coef = two_mu * (quad_form(a, v) - *base);
            if coef == T::zero() {
                continue;
            }
            for r in 0..d {
                let cr = coef * v[r];
                if cr == T::zero() {
                    continue;
                }
                for c in r..d {
                    g[(r, c)] += cr * v[c];
                }
            }
        }
        for r in 0..d {
            for c in 0..r {
                g[(r, c)] = g[(c, r)];
            }
        }
        Ok(g)
    }
}

/// `h(A)` on `data` with the given target neighbours.
pub fn ldmlr_objective<T: Scalar>(
    a: &PsdMetric<T>,
    data: &LabeledDataset<T>,
    nbrs: &NeighborGraph,
    cfg: &LdmlrConfig<T>,
) -> Result<T> {
    LdmlrProblem::new(data, nbrs, cfg.mu, cfg.p)?.value(a.matrix())
}

/// `∇h(A)`; accepts any square matrix so that it can be probed off the cone.
pub fn ldmlr_gradient<T: Scalar>(
    a: &Matrix<T>,
    data: &LabeledDataset<T>,
    nbrs: &NeighborGraph,
    cfg: &LdmlrConfig<T>,
) -> Result<Matrix<T>> {
    LdmlrProblem::new(data, nbrs, cfg.mu, cfg.p)?.gradient(a)
}

/// Frobenius-nearest PSD matrix: eigendecomposition with negative
/// eigenvalues clipped to zero.
pub fn project_psd<T: Scalar>(m: &Matrix<T>) -> Result<PsdMetric<T>> {
    let eig = SymmetricEigen::new(m)?;
    let clipped = eig.reconstruct_with(|x| x.max(T::zero()));
    let clipped_eig = SymmetricEigen {
        values: eig.values.iter().map(|&x| x.max(T::zero())).collect(),
        vectors: eig.vectors,
    };
    Ok(PsdMetric::from_eigen(clipped, &clipped_eig))
}

#[derive(Debug, Clone)]
pub struct LdmlrTrace<T> {
    /// `h` at every iterate, starting with `A₀ = I`.
    pub objective: Vec<T>,
    pub setup_seconds: f64,
    pub loop_seconds: f64,
}

impl<T> LdmlrTrace<T> {
    pub fn iterations(&self) -> usize {
        self.objective.len() - 1
    }
}

/// Runs exactly `t_max` projected-gradient steps from the identity.
pub fn train_ldmlr<T: Scalar>(
    data: &LabeledDataset<T>,
    cfg: &LdmlrConfig<T>,
) -> Result<(PsdMetric<T>, LdmlrTrace<T>)> {
    train_ldmlr_observed(data, cfg, &mut |_, _| {})
}

/// [`train_ldmlr`], calling `observer` with every projected iterate.
pub fn train_ldmlr_observed<T: Scalar>(
    data: &LabeledDataset<T>,
    cfg: &LdmlrConfig<T>,
    observer: &mut dyn FnMut(usize, &PsdMetric<T>),
) -> Result<(PsdMetric<T>, LdmlrTrace<T>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    let t0 = Instant::now();
    let nbrs = find_target_neighbors(data, cfg.k)?;
    let problem = LdmlrProblem::new(data, &nbrs, cfg.mu, cfg.p)?;
    let setup_seconds = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mut metric = PsdMetric::identity(data.dim());
    let mut objective = vec![problem.value(metric.matrix())?];
    for iteration in 0..cfg.t_max {
        let g = problem.gradient(metric.matrix())?;
        let mut next = metric.matrix().clone();
        next.axpy(-cfg.step, &g)?;
        if !next.is_finite() {
            return Err(Error::Numerical {
                iteration,
                message: "gradient step produced non-finite entries".into(),
            });
        }
        metric = project_psd(&next).map_err(|e| Error::Numerical {
            iteration,
            message: e.to_string(),
        })?;
        let h = problem.value(metric.matrix())?;
        if !h.is_finite() {
            return Err(Error::Numerical {
                iteration,
                message: format!("objective {h} is not finite"),
            });
        }
        objective.push(h);
        observer(iteration, &metric);
    }
    Ok((
        metric,
        LdmlrTrace {
            objective,
            setup_seconds,
            loop_seconds: t1.elapsed().as_secs_f64(),
        },
    ))
}

/// `d²_A(x, y)` for a raw matrix; used where `A` is not known to be PSD.
pub fn sq_distance_under<T: Scalar>(a: &Matrix<T>, x: &[T], y: &[T]) -> T {
    let v: Vec<T> = x.iter().zip(y).map(|(&p, &q)| p - q).collect();
    quad_form(a, &v)
}
