//! Learning a low-rank metric `A = LᵀL` by matching `L x_i` to classical-MDS
//! targets `c y_i` while preserving local neighbourhoods.
//!
//! The objective over `L ∈ R^{s×d}` and the scale `c` is
//!
//! ```text
//! f(L, c) = ½ Σ_i ‖L x_i − c y_i‖² + μ Σ_{(i,j) ∈ η} (‖L(x_i − x_j)‖² − ‖x_i − x_j‖²)²
//! ```
//!
//! with gradients
//!
//! ```text
//! ∇_L f = Σ_i (L x_i − c y_i) x_iᵀ + 4μ Σ_η (‖L v_ij‖² − ‖v_ij‖²) L v_ij v_ijᵀ
//! ∇_c f = c Σ_i y_iᵀ y_i − Σ_i y_iᵀ L x_i
//! ```
//!
//! where `v_ij = x_i − x_j`. [`train`] minimises `f` by steepest descent with
//! Armijo backtracking from `L = (e_1, …, e_s)ᵀ`, `c = 1`.

use std::time::Instant;

use crate::dataset::LabeledDataset;
use crate::edm::{build_label_edm, classical_mds, embed_labels, min_beta, EmbeddingSet};
use crate::error::{Error, Result};
use crate::linalg::{dot, sq_dist, Matrix};
use crate::neighbors::{find_target_neighbors, NeighborGraph};
use crate::scalar::Scalar;

/// Linear map `L` (`s × d`), target scale `c` and the training-data mean that
/// queries are shifted by before projection.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMetric<T> {
    pub l: Matrix<T>,
    pub c: T,
    pub center_offset: Vec<T>,
}

impl<T: Scalar> LinearMetric<T> {
    pub fn new(l: Matrix<T>, c: T, center_offset: Vec<T>) -> Result<Self> {
        if center_offset.len() != l.cols() {
            return Err(Error::invalid(format!(
                "centre offset has length {}, L has {} columns",
                center_offset.len(),
                l.cols()
            )));
        }
        if l.rows() == 0 || l.cols() == 0 {
            return Err(Error::invalid("L must be non-empty"));
        }
        Ok(Self {
            l,
            c,
            center_offset,
        })
    }

    /// Starting point of the descent: the first `s` coordinate axes, `c = 1`.
    pub fn initial(s: usize, d: usize) -> Result<Self> {
        if s == 0 || s > d {
            return Err(Error::invalid(format!(
                "embedding dimension s = {s} must satisfy 1 <= s <= d = {d}"
            )));
        }
        let l = Matrix::from_fn(s, d, |i, j| if i == j { T::one() } else { T::zero() });
        Self::new(l, T::one(), vec![T::zero(); d])
    }

    /// `L = I_d`: plain Euclidean distance.
    pub fn identity(d: usize) -> Result<Self> {
        Self::initial(d, d)
    }

    #[inline]
    pub fn s(&self) -> usize {
        self.l.rows()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.l.cols()
    }

    /// `A = LᵀL`.
    pub fn metric_matrix(&self) -> Matrix<T> {
        self.l
            .transpose()
            .matmul(&self.l)
            .expect("LᵀL shapes agree")
            .symmetrized()
    }

    /// `L (x − offset)`.
    pub fn project(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.d() {
            return Err(Error::invalid(format!(
                "point has dimension {}, metric expects {}",
                x.len(),
                self.d()
            )));
        }
        let shifted: Vec<T> = x
            .iter()
            .zip(&self.center_offset)
            .map(|(&a, &o)| a - o)
            .collect();
        self.l.mul_vec(&shifted)
    }
}

/// Hyper-parameters of the descent.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<T> {
    /// Weight `μ` of the neighbourhood-preservation term.
    pub mu: T,
    /// Initial trial step `γ`.
    pub gamma: T,
    /// Backtracking factor `ρ ∈ (0, 1)`.
    pub rho: T,
    /// Sufficient-decrease constant `σ ∈ (0, 1)`.
    pub sigma: T,
    /// Largest backtracking exponent `r`; trial steps are `γ ρ^m`, `m = 0..=r`.
    pub max_linesearch: usize,
    /// Stop once the gradient norm is at most this.
    pub epsilon: T,
    pub max_iters: usize,
    /// Embedding dimension (rows of `L`).
    pub s: usize,
    /// Number of target neighbours.
    pub k: usize,
    /// Label-distance shift.
    pub beta: T,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        Self {
            mu: T::lit(1e-10),
            gamma: T::lit(1e-9),
            rho: T::lit(0.5),
            sigma: T::lit(0.05),
            max_linesearch: 20,
            epsilon: T::lit(1e-6),
            max_iters: 500,
            s: 3,
            k: 5,
            beta: T::one(),
        }
    }
}

impl<T: Scalar> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let open_unit = |x: T| x > T::zero() && x < T::one();
        if !(self.mu >= T::zero()) || !self.mu.is_finite() {
            return Err(Error::invalid("mu must be finite and non-negative"));
        }
        if !(self.gamma > T::zero()) || !self.gamma.is_finite() {
            return Err(Error::invalid("gamma must be positive"));
        }
        if !open_unit(self.rho) {
            return Err(Error::invalid("rho must lie in (0, 1)"));
        }
        if !open_unit(self.sigma) {
            return Err(Error::invalid("sigma must lie in (0, 1)"));
        }
        if !(self.epsilon > T::zero()) {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if self.max_linesearch == 0 {
            return Err(Error::invalid("max_linesearch must be >= 1"));
        }
        if self.s == 0 {
            return Err(Error::invalid("s must be >= 1"));
        }
        if self.k == 0 {
            return Err(Error::invalid("K must be >= 1"));
        }
        if !self.beta.is_finite() {
            return Err(Error::invalid("beta must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient norm fell to `epsilon` or below.
    Converged,
    MaxIters,
    /// No trial step satisfied the sufficient-decrease condition.
    LineSearchExhausted,
}

/// Per-iteration record of a descent run.
#[derive(Debug, Clone)]
pub struct TrainTrace<T> {
    /// Objective at every iterate, starting with the initial point.
    pub objective: Vec<T>,
    /// Gradient norm at every iterate.
    pub grad_norm: Vec<T>,
    /// Accepted step lengths, one per iteration.
    pub steps: Vec<T>,
    pub status: Termination,
    /// Seconds spent building targets and neighbours.
    pub setup_seconds: f64,
    /// Seconds spent in the descent loop.
    pub loop_seconds: f64,
}

impl<T: Scalar> TrainTrace<T> {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn final_grad_norm(&self) -> T {
        *self.grad_norm.last().expect("trace has the initial point")
    }

    pub fn final_objective(&self) -> T {
        *self.objective.last().expect("trace has the initial point")
    }
}

/// Gradient of `f` with respect to `(L, c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient<T> {
    pub l: Matrix<T>,
    pub c: T,
}

impl<T: Scalar> Gradient<T> {
    /// Frobenius norm over the concatenated `(L, c)` variable.
    pub fn norm(&self) -> T {
        (self.l.frobenius_norm_sq() + self.c * self.c).sqrt()
    }
}

/// Centred samples, targets and neighbour pairs with cached `‖v_ij‖²`.
pub struct FitProblem<T> {
    x: Matrix<T>,
    y: Matrix<T>,
    pairs: Vec<(usize, usize, T)>,
    mu: T,
    y_sq: T,
}

impl<T: Scalar> FitProblem<T> {
    /// `x` must already be expressed relative to the metric's centre offset.
    pub fn new(
        x: Matrix<T>,
        targets: &EmbeddingSet<T>,
        nbrs: &NeighborGraph,
        mu: T,
    ) -> Result<Self> {
        if targets.count() != x.rows() {
            return Err(Error::invalid(format!(
                "{} samples but {} target points",
                x.rows(),
                targets.count()
            )));
        }
        if nbrs.index_bound() > x.rows() {
            return Err(Error::invalid("neighbour pair refers to a missing sample"));
        }
        let pairs = nbrs
            .pairs()
            .iter()
            .map(|&(i, j)| (i, j, sq_dist(x.row(i), x.row(j))))
            .collect();
        let y = targets.points().clone();
        let y_sq = y.frobenius_norm_sq();
        Ok(Self {
            x,
            y,
            pairs,
            mu,
            y_sq,
        })
    }

    fn from_metric(
        metric: &LinearMetric<T>,
        data: &LabeledDataset<T>,
        targets: &EmbeddingSet<T>,
        nbrs: &NeighborGraph,
        mu: T,
    ) -> Result<Self> {
        if data.dim() != metric.d() {
            return Err(Error::invalid(format!(
                "data dimension {} but L has {} columns",
                data.dim(),
                metric.d()
            )));
        }
        if targets.dim() != metric.s() {
            return Err(Error::invalid(format!(
                "targets have dimension {} but L has {} rows",
                targets.dim(),
                metric.s()
            )));
        }
        let x = data.features().sub_row_vector(&metric.center_offset)?;
        Self::new(x, targets, nbrs, mu)
    }

    fn check(&self, l: &Matrix<T>) -> Result<()> {
        if l.cols() != self.x.cols() || l.rows() != self.y.cols() {
            return Err(Error::invalid(format!(
                "L is {}x{}, expected {}x{}",
                l.rows(),
                l.cols(),
                self.y.cols(),
                self.x.cols()
            )));
        }
        Ok(())
    }

    /// Rows `L x_i`.
    fn projected(&self, l: &Matrix<T>) -> Matrix<T> {
        self.x.matmul_transpose(l).expect("shapes checked")
    }

    fn value_from_projection(&self, lx: &Matrix<T>, c: T) -> T {
        let half = T::lit(0.5);
        let mut fit = T::zero();
        for i in 0..lx.rows() {
            fit += lx
                .row(i)
                .iter()
                .zip(self.y.row(i))
                .map(|(&a, &b)| {
                    let r = a - c * b;
                    r * r
                })
                .sum::<T>();
        }
        let mut local = T::zero();
        for &(i, j, base) in &self.pairs {
            let e = sq_dist(lx.row(i), lx.row(j)) - base;
            local += e * e;
        }
        half * fit + self.mu * local
    }

    pub fn value(&self, l: &Matrix<T>, c: T) -> Result<T> {
        self.check(l)?;
        Ok(self.value_from_projection(&self.projected(l), c))
    }

    /// Objective and gradient in one pass.
    pub fn value_and_gradient(&self, l: &Matrix<T>, c: T) -> Result<(T, Gradient<T>)> {
        self.check(l)?;
        let lx = self.projected(l);
        let value = self.value_from_projection(&lx, c);

        // Both gradient terms are of the form Σ_i w_i x_iᵀ; collect the w_i.
        let mut w = lx.clone();
        w.axpy(-c, &self.y)?;
        let four_mu = T::lit(4.0) * self.mu;
        if four_mu != T::zero() {
            let s = lx.cols();
            let mut u = vec![T::zero(); s];
            for &(i, j, base) in &self.pairs {
                for (k, uk) in u.iter_mut().enumerate() {
                    *uk = lx[(i, k)] - lx[(j, k)];
                }
                let coef = four_mu * (dot(&u, &u) - base);
                for (k, &uk) in u.iter().enumerate() {
                    w[(i, k)] += coef * uk;
                    w[(j, k)] -= coef * uk;
                }
            }
        }
        let grad_l = w.transpose().matmul(&self.x)?;
        let cross: T = (0..lx.rows()).map(|i| dot(self.y.row(i), lx.row(i))).sum();
        let grad_c = c * self.y_sq - cross;
        Ok((
            value,
            Gradient {
                l: grad_l,
                c: grad_c,
            },
        ))
    }
}

/// Value of `f(L, c)` on `data` (shifted by the metric's centre offset).
pub fn objective<T: Scalar>(
    metric: &LinearMetric<T>,
    data: &LabeledDataset<T>,
    targets: &EmbeddingSet<T>,
    nbrs: &NeighborGraph,
    mu: T,
) -> Result<T> {
    FitProblem::from_metric(metric, data, targets, nbrs, mu)?.value(&metric.l, metric.c)
}

/// Analytic gradient of [`objective`].
pub fn gradient<T: Scalar>(
    metric: &LinearMetric<T>,
    data: &LabeledDataset<T>,
    targets: &EmbeddingSet<T>,
    nbrs: &NeighborGraph,
    mu: T,
) -> Result<Gradient<T>> {
    FitProblem::from_metric(metric, data, targets, nbrs, mu)?
        .value_and_gradient(&metric.l, metric.c)
        .map(|(_, g)| g)
}

/// Observer for [`minimize`], called once per iterate with the
/// iteration index, objective and gradient norm.
pub trait DescentObserver<T> {
    fn iterate(&mut self, iteration: usize, objective: T, grad_norm: T);
}

impl<T, F: FnMut(usize, T, T)> DescentObserver<T> for F {
    fn iterate(&mut self, iteration: usize, objective: T, grad_norm: T) {
        self(iteration, objective, grad_norm)
    }
}

/// Steepest descent with Armijo backtracking on a prepared problem.
///
/// At iterate `θ_k` with gradient `g_k` the trial steps `α = γ ρ^m`,
/// `m = 0, 1, …, r`, are tried in order and the first one with
/// `f(θ_k − α g_k) − f(θ_k) ≤ −σ α ‖g_k‖²` is taken. A trial whose objective
/// is not finite is rejected like any other failing trial.
pub fn minimize<T: Scalar>(
    problem: &FitProblem<T>,
    start: (Matrix<T>, T),
    cfg: &TrainConfig<T>,
    observer: &mut dyn DescentObserver<T>,
) -> Result<(Matrix<T>, T, TrainTrace<T>)> {
    cfg.validate()?;
    let t0 = Instant::now();
    let (mut l, mut c) = start;
    let mut objective = Vec::new();
    let mut grad_norm = Vec::new();
    let mut steps = Vec::new();

    let status = loop {
        let iteration = steps.len();
        let (f, g) = problem.value_and_gradient(&l, c)?;
        let gnorm = g.norm();
        if !f.is_finite() || !gnorm.is_finite() {
            return Err(Error::Numerical {
                iteration,
                message: format!("objective {f} or gradient norm {gnorm} is not finite"),
            });
        }
        objective.push(f);
        grad_norm.push(gnorm);
        observer.iterate(iteration, f, gnorm);
        if gnorm <= cfg.epsilon {
            break Termination::Converged;
        }
        if iteration >= cfg.max_iters {
            break Termination::MaxIters;
        }

        let slope = -(gnorm * gnorm); // ∇fᵀd with d = −∇f
        let mut alpha = cfg.gamma;
        let mut accepted = None;
        for _ in 0..=cfg.max_linesearch {
            let mut trial_l = l.clone();
            trial_l.axpy(-alpha, &g.l)?;
            let trial_c = c - alpha * g.c;
            let trial_f = problem.value(&trial_l, trial_c)?;
            if trial_f - f <= cfg.sigma * alpha * slope {
                accepted = Some((trial_l, trial_c));
                break;
            }
            alpha *= cfg.rho;
        }
        match accepted {
            Some((nl, nc)) => {
                l = nl;
                c = nc;
                steps.push(alpha);
            }
            None => break Termination::LineSearchExhausted,
        }
    };

    let trace = TrainTrace {
        objective,
        grad_norm,
        steps,
        status,
        setup_seconds: 0.0,
        loop_seconds: t0.elapsed().as_secs_f64(),
    };
    Ok((l, c, trace))
}

/// Targets for training: the compressed group path when some label repeats,
/// full classical MDS otherwise. Rejects a `beta` below the admissible bound.
pub fn embedding_targets<T: Scalar>(labels: &[T], beta: T, s: usize) -> Result<EmbeddingSet<T>> {
    let distinct = crate::dataset::distinct_sorted(labels);
    if distinct.len() < labels.len() {
        return embed_labels(labels, beta, s);
    }
    let bound = min_beta(&distinct)?;
    if !bound.admits(beta) {
        return Err(Error::BetaBelowBound {
            beta: beta.as_f64(),
            min_beta: bound.min_beta.as_f64(),
            mu0: bound.mu0.as_f64(),
        });
    }
    classical_mds(&build_label_edm(labels, beta)?, s)
}

/// Full training pipeline: group and centre the data, build the label
/// embedding targets, find target neighbours and run [`minimize`].
pub fn train<T: Scalar>(
    data: &LabeledDataset<T>,
    cfg: &TrainConfig<T>,
) -> Result<(LinearMetric<T>, TrainTrace<T>)> {
    train_observed(data, cfg, &mut |_, _, _| {})
}

pub fn train_observed<T: Scalar>(
    data: &LabeledDataset<T>,
    cfg: &TrainConfig<T>,
    observer: &mut dyn DescentObserver<T>,
) -> Result<(LinearMetric<T>, TrainTrace<T>)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if cfg.s > data.dim() {
        return Err(Error::invalid(format!(
            "embedding dimension s = {} exceeds feature dimension d = {}",
            cfg.s,
            data.dim()
        )));
    }
    let t0 = Instant::now();
    let grouped = data.grouped();
    let (centered, offset) = grouped.centered();
    let targets = embedding_targets(centered.labels(), cfg.beta, cfg.s)?;
    let nbrs = find_target_neighbors(&centered, cfg.k)?;
    let problem = FitProblem::new(centered.features().clone(), &targets, &nbrs, cfg.mu)?;
    let start = LinearMetric::<T>::initial(cfg.s, data.dim())?;
    let setup_seconds = t0.elapsed().as_secs_f64();

    let (l, c, mut trace) = minimize(&problem, (start.l, start.c), cfg, observer)?;
    trace.setup_seconds = setup_seconds;
    Ok((LinearMetric::new(l, c, offset)?, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> (LabeledDataset<f64>, EmbeddingSet<f64>) {
        let x = Matrix::from_rows(&[
            vec![1.0, 0.0, 2.0],
            vec![0.0, 1.0, -1.0],
            vec![-1.0, -1.0, -1.0],
        ])
        .unwrap();
        let d = LabeledDataset::new(x, vec![0.0, 0.0, 1.0]).unwrap();
        let y = EmbeddingSet::from_points(
            Matrix::from_rows(&[vec![1.0], vec![1.0], vec![-2.0]]).unwrap(),
        );
        (d, y)
    }

    #[test]
    fn single_point_no_neighbours() {
        let x = Matrix::from_rows(&[vec![2.0, 3.0]]).unwrap();
        let data = LabeledDataset::new(x, vec![0.0]).unwrap();
        let y = Matrix::from_rows(&[vec![0.5]]).unwrap();
        // EmbeddingSet::from_points would centre a single point to zero
        let problem = FitProblem {
            x: data.features().clone(),
            y: y.clone(),
            pairs: vec![],
            mu: 1.0,
            y_sq: 0.25,
        };
        let l = Matrix::from_rows(&[vec![1.0, -1.0]]).unwrap();
        let f = problem.value(&l, 2.0).unwrap();
        assert!((f - 0.5 * (-1.0f64 - 1.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn zero_map_with_one_pair() {
        let (data, y) = tiny();
        let nbrs = NeighborGraph::from_pairs(vec![(0, 1)], 1);
        let metric = LinearMetric::new(Matrix::zeros(1, 3), 0.0, vec![0.0; 3]).unwrap();
        let mu = 0.3;
        let f = objective(&metric, &data, &y, &nbrs, mu).unwrap();
        let v2 = 1.0 + 1.0 + 9.0;
        assert!((f - mu * v2 * v2).abs() < 1e-12);
    }

    #[test]
    fn zero_mu_is_pure_least_squares() {
        let (data, y) = tiny();
        let nbrs = find_target_neighbors(&data, 2).unwrap();
        let metric = LinearMetric::new(
            Matrix::from_rows(&[vec![0.5, -0.2, 0.1]]).unwrap(),
            1.3,
            vec![0.0; 3],
        )
        .unwrap();
        let f = objective(&metric, &data, &y, &nbrs, 0.0).unwrap();
        let mut expect = 0.0;
        for i in 0..3 {
            let lx = metric.l.mul_vec(data.sample(i)).unwrap()[0];
            expect += 0.5 * (lx - 1.3 * y.point(i)[0]).powi(2);
        }
        assert!((f - expect).abs() < 1e-14);
    }

    #[test]
    fn zero_point_zero_targets_gradient_vanishes() {
        let (data, _) = tiny();
        let y = EmbeddingSet::from_points(Matrix::zeros(3, 2));
        let nbrs = find_target_neighbors(&data, 1).unwrap();
        let metric = LinearMetric::new(Matrix::zeros(2, 3), 0.0, vec![0.0; 3]).unwrap();
        let g = gradient(&metric, &data, &y, &nbrs, 1.0).unwrap();
        assert_eq!(g.c, 0.0);
        assert_eq!(g.l.max_abs(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let (data, y) = tiny();
        let nbrs = NeighborGraph::empty(1);
        let wrong_s = LinearMetric::new(Matrix::zeros(2, 3), 1.0, vec![0.0; 3]).unwrap();
        assert!(objective(&wrong_s, &data, &y, &nbrs, 1.0).is_err());
        let wrong_d = LinearMetric::new(Matrix::zeros(1, 2), 1.0, vec![0.0; 2]).unwrap();
        assert!(gradient(&wrong_d, &data, &y, &nbrs, 1.0).is_err());
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = TrainConfig::<f64>::default();
        assert_eq!(cfg.mu, 1e-10);
        assert_eq!(cfg.gamma, 1e-9);
        assert_eq!(cfg.rho, 0.5);
        assert_eq!(cfg.sigma, 0.05);
        assert_eq!(cfg.max_linesearch, 20);
        assert_eq!((cfg.s, cfg.k, cfg.beta), (3, 5, 1.0));
        assert!(cfg.validate().is_ok());
        assert!(TrainConfig {
            rho: 1.0,
            ..cfg.clone()
        }
        .validate()
        .is_err());
        assert!(TrainConfig {
            sigma: 0.0,
            ..cfg.clone()
        }
        .validate()
        .is_err());
        assert!(TrainConfig { gamma: -1.0, ..cfg }.validate().is_err());
    }

    #[test]
    fn s_larger_than_d_is_rejected() {
        let (data, _) = tiny();
        let cfg = TrainConfig {
            s: 4,
            ..TrainConfig::default()
        };
        assert!(matches!(train(&data, &cfg), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn metric_matrix_matches_projection() {
        let l = Matrix::from_rows(&[vec![1.0, 2.0, 0.0], vec![0.0, -1.0, 3.0]]).unwrap();
        let m = LinearMetric::new(l, 1.0, vec![0.5, 0.0, -0.5]).unwrap();
        let a = m.metric_matrix();
        let v = [0.3, -1.2, 2.0];
        let lv = m.l.mul_vec(&v).unwrap();
        let quad = dot(&v, &a.mul_vec(&v).unwrap());
        assert!(f64::abs(quad - dot(&lv, &lv)) < 1e-12);
    }
}
