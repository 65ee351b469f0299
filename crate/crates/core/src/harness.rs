//! Repeated-trial evaluation, timing benchmarks and layering profiles.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::eval::{layering_profile, mae, Euclidean, EvalReport, RankingIndex};
use crate::io::Model;
use crate::ldmlr::{train_ldmlr, LdmlrConfig};
use crate::learner::{train, TrainConfig};
use crate::linalg::Matrix;
use crate::preprocess::fit_pca;
use crate::scalar::Scalar;
use crate::split::{split, SplitSpec};
use crate::synth::{synth, SynthSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    CmdsDml,
    Ldmlr,
    Euclidean,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::CmdsDml, Method::Ldmlr, Method::Euclidean];

    pub fn name(self) -> &'static str {
        match self {
            Method::CmdsDml => "cmds-dml",
            Method::Ldmlr => "ldmlr",
            Method::Euclidean => "euclidean",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method '{s}' (expected cmds-dml, ldmlr or euclidean)"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig<T> {
    pub method: Method,
    pub train: TrainConfig<T>,
    pub ldmlr: LdmlrConfig<T>,
    pub split: SplitSpec,
    pub trials: usize,
    /// Neighbours used for k-NN label prediction.
    pub knn_k: usize,
    /// Optional PCA target dimension, fitted on each training split.
    pub pca_dim: Option<usize>,
    /// Predict the training part itself instead of the held-out part.
    pub test_on_train: bool,
}

impl<T: Scalar> Default for ExperimentConfig<T> {
    fn default() -> Self {
        let train = TrainConfig::default();
        Self {
            method: Method::CmdsDml,
            knn_k: train.k,
            train,
            ldmlr: LdmlrConfig::default(),
            split: SplitSpec::new(10, 0),
            trials: 50,
            pca_dim: None,
            test_on_train: false,
        }
    }
}

impl<T: Scalar> ExperimentConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be >= 1"));
        }
        if self.knn_k == 0 {
            return Err(Error::invalid("k-NN k must be >= 1"));
        }
        match self.method {
            Method::CmdsDml => self.train.validate(),
            Method::Ldmlr => self.ldmlr.validate(),
            Method::Euclidean => Ok(()),
        }
    }
}

/// What fitting a model cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSummary {
    pub iterations: usize,
    pub loop_seconds: f64,
}

impl FitSummary {
    pub fn seconds_per_iteration(&self) -> f64 {
        self.loop_seconds / self.iterations.max(1) as f64
    }
}

/// Trains `method` on `data` (the Euclidean baseline needs no training).
pub fn fit_model<T: Scalar>(
    method: Method,
    data: &LabeledDataset<T>,
    cfg: &ExperimentConfig<T>,
) -> Result<(Model<T>, FitSummary)> {
    match method {
        Method::CmdsDml => {
            let (m, trace) = train(data, &cfg.train)?;
            Ok((
                Model::CmdsDml(m),
                FitSummary {
                    iterations: trace.iterations(),
                    loop_seconds: trace.loop_seconds,
                },
            ))
        }
        Method::Ldmlr => {
            let (m, trace) = train_ldmlr(data, &cfg.ldmlr)?;
            Ok((
                Model::Ldmlr(m),
                FitSummary {
                    iterations: trace.iterations(),
                    loop_seconds: trace.loop_seconds,
                },
            ))
        }
        Method::Euclidean => Ok((
            Model::Euclidean(Euclidean { dim: data.dim() }),
            FitSummary {
                iterations: 0,
                loop_seconds: 0.0,
            },
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub mae: f64,
    pub wall_time_s: f64,
}

/// Train/test evaluation of one method on already split data.
pub fn evaluate_split<T: Scalar>(
    method: Method,
    train_set: &LabeledDataset<T>,
    test_set: &LabeledDataset<T>,
    cfg: &ExperimentConfig<T>,
) -> Result<f64> {
    let (train_set, test_set) = match cfg.pca_dim {
        Some(k) => {
            let pca = fit_pca(train_set, k)?;
            (pca.apply_dataset(train_set)?, pca.apply_dataset(test_set)?)
        }
        None => (train_set.clone(), test_set.clone()),
    };
    let (model, _) = fit_model(method, &train_set, cfg)?;
    let index = RankingIndex::new(&model, &train_set)?;
    let predicted = index.predict_all(test_set.features(), cfg.knn_k)?;
    Ok(mae(&predicted, test_set.labels())?.as_f64())
}

/// One seeded trial: split with `seed + trial`, fit, predict the test part.
pub fn run_trial<T: Scalar>(
    data: &LabeledDataset<T>,
    cfg: &ExperimentConfig<T>,
    trial: usize,
) -> Result<TrialResult> {
    let seed = cfg.split.seed.wrapping_add(trial as u64);
    let (train_set, mut test_set) =
        split(data, SplitSpec::new(cfg.split.per_label_train_count, seed))?;
    if cfg.test_on_train {
        test_set = train_set.clone();
    }
    if test_set.is_empty() {
        return Err(Error::invalid("split leaves no test samples"));
    }
    let t0 = Instant::now();
    let mae = evaluate_split(cfg.method, &train_set, &test_set, cfg)?;
    Ok(TrialResult {
        trial,
        seed,
        mae,
        wall_time_s: t0.elapsed().as_secs_f64(),
    })
}

pub fn run_eval<T: Scalar>(
    data: &LabeledDataset<T>,
    cfg: &ExperimentConfig<T>,
) -> Result<(EvalReport, Vec<TrialResult>)> {
    cfg.validate()?;
    let trials = (0..cfg.trials)
        .map(|t| run_trial(data, cfg, t))
        .collect::<Result<Vec<_>>>()?;
    let maes: Vec<f64> = trials.iter().map(|t| t.mae).collect();
    let secs: Vec<f64> = trials.iter().map(|t| t.wall_time_s).collect();
    Ok((EvalReport::from_trials(&maes, &secs)?, trials))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub iterations: usize,
    pub seconds_per_iteration: f64,
}

/// Mean per-iteration time of both learners on benchmark-style data of
/// `n` samples in each dimension of `dims`. Each learner runs `iters`
/// iterations (cMDS-DML may stop earlier if its line search gives up).
pub fn bench<T: Scalar>(
    n: usize,
    dims: &[usize],
    k: usize,
    iters: usize,
    seed: u64,
) -> Result<Vec<BenchRow>> {
    let mut spec = SynthSpec::benchmark(seed);
    spec.dim = dims.iter().copied().max().unwrap_or(0);
    spec.per_group = n / spec.m();
    if n < 3 || spec.dim < spec.distractor_dims + spec.signal_dims {
        return Err(Error::invalid(format!(
            "bench needs n >= 3 and dimensions >= {}",
            spec.distractor_dims + spec.signal_dims
        )));
    }
    bench_dataset(&synth::<T>(&spec)?, dims, k, iters)
}

/// [`bench`] on the leading `d` coordinates of `data` for each `d` in `dims`.
pub fn bench_dataset<T: Scalar>(
    data: &LabeledDataset<T>,
    dims: &[usize],
    k: usize,
    iters: usize,
) -> Result<Vec<BenchRow>> {
    if data.len() < 2 || iters == 0 {
        return Err(Error::invalid(
            "bench needs two samples and at least one iteration",
        ));
    }
    let mut rows = Vec::new();
    for &d in dims {
        if d == 0 || d > data.dim() {
            return Err(Error::invalid(format!(
                "bench dimension {d} outside 1..={}",
                data.dim()
            )));
        }
        let x = Matrix::from_fn(data.len(), d, |i, j| data.features()[(i, j)]);
        let sub = data.with_features(x)?;
        let mut cfg = ExperimentConfig::<T>::default();
        cfg.train.k = k;
        cfg.train.max_iters = iters;
        cfg.train.epsilon = T::min_positive_value();
        cfg.train.s = cfg.train.s.min(d);
        cfg.ldmlr.k = k;
        cfg.ldmlr.t_max = iters;
        for method in [Method::CmdsDml, Method::Ldmlr] {
            let (_, fit) = fit_model(method, &sub, &cfg)?;
            rows.push(BenchRow {
                method,
                n: sub.len(),
                d,
                iterations: fit.iterations,
                seconds_per_iteration: fit.seconds_per_iteration(),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileRow<T> {
    pub index: usize,
    pub label: T,
    pub euclidean: T,
    pub learned: T,
}

/// Distances to `anchor` under the Euclidean metric and under `model`.
pub fn profile<T: Scalar>(
    model: &Model<T>,
    data: &LabeledDataset<T>,
    anchor: usize,
) -> Result<Vec<ProfileRow<T>>> {
    let e = layering_profile(&Euclidean { dim: data.dim() }, data, anchor)?;
    let l = layering_profile(model, data, anchor)?;
    Ok((0..data.len())
        .map(|i| ProfileRow {
            index: i,
            label: data.labels()[i],
            euclidean: e[i],
            learned: l[i],
        })
        .collect())
}
