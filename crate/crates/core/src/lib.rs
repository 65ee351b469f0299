//! Ordinal distance metric learning with classical MDS targets.
//!
//! Labels are turned into a Euclidean distance matrix, embedded with
//! classical MDS, and a linear map `L` is fitted so that `L x_i` lands near
//! its label's embedding point while same-label neighbourhoods keep their
//! size. The induced metric `A = LᵀL` ranks samples by ordinal similarity.
//! The LDMLR projected-gradient method is included as a baseline, together
//! with k-NN label regression, PCA, seeded splitting and synthetic data.
//!
//! Every numeric routine is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to one of them.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod dataset;
pub mod edm;
pub mod error;
pub mod eval;
pub mod harness;
pub mod io;
pub mod ldmlr;
pub mod learner;
pub mod linalg;
pub mod neighbors;
pub mod preprocess;
pub mod scalar;
pub mod split;
pub mod synth;

pub use dataset::{LabelGroup, LabeledDataset};
pub use edm::{
    build_group_edm, build_label_edm, centering_matrix, cmds_embed, embed_labels, is_edm, min_beta,
    BetaBound, EmbeddingSet, SquaredDistanceMatrix,
};
pub use error::{Error, Result};
pub use eval::{
    knn_predict, layering_profile, mae, metric_distance, rank_query, spearman, DistanceMetric,
    Euclidean, EvalReport, RankedSample, RankingIndex, RankingResult,
};
pub use harness::{ExperimentConfig, Method};
pub use io::{load_csv, save_csv, Model};
pub use ldmlr::{
    ldmlr_gradient, ldmlr_objective, ordinal_weight, project_psd, train_ldmlr, LdmlrConfig,
    LdmlrTrace, PsdMetric,
};
pub use learner::{
    gradient, objective, train, FitProblem, Gradient, LinearMetric, Termination, TrainConfig,
    TrainTrace,
};
pub use linalg::{Matrix, SymmetricEigen};
pub use neighbors::{find_target_neighbors, NeighborGraph};
pub use preprocess::{apply_pca, center, fit_pca, PcaModel};
pub use scalar::Scalar;
pub use split::{split, SplitSpec};
pub use synth::{synth, SynthSpec};

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Dataset64 = LabeledDataset<f64>;
pub type Dataset32 = LabeledDataset<f32>;
pub type LinearMetric64 = LinearMetric<f64>;
pub type LinearMetric32 = LinearMetric<f32>;
pub type PsdMetric64 = PsdMetric<f64>;
pub type PsdMetric32 = PsdMetric<f32>;
pub type TrainConfig64 = TrainConfig<f64>;
pub type TrainConfig32 = TrainConfig<f32>;
pub type LdmlrConfig64 = LdmlrConfig<f64>;
pub type LdmlrConfig32 = LdmlrConfig<f32>;
pub type Model64 = Model<f64>;
pub type Model32 = Model<f32>;
