//! Semi-supervised inference for the mean and variance of a response, and for
//! average treatment effects, using cross-fitted regression adjustments and a
//! pool of unlabeled covariates.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The `*F64`
//! and `*F32` aliases name the common instantiations.

// `!(x > y)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod causal;
pub mod data;
pub mod error;
pub mod nuisance;
pub mod scalar;
pub mod ssl;

pub use causal::{
    ate_tes_with_nuisances, ate_with_nuisances, estimate_ate, estimate_ate_tes, estimate_tes,
    fit_fold_nuisances, sample_ate, AteInference, CausalLabeledSet, CausalUnlabeledSet, FoldNuisance,
    TesInference,
};
pub use data::{augment, make_partition, FoldPartition, LabeledSet, RunConfig, TrimBounds, UnlabeledSet};
pub use error::{Error, Result};
pub use nuisance::{
    ConstantPropensity, LearnerSpec, LogisticLasso, Penalty, PropensityFit, PropensityLearner,
    PropensityModel, SlopeFit, SlopeLearner, Variant,
};
pub use scalar::Scalar;
pub use ssl::{
    estimate_mean, estimate_mean_multi, estimate_mean_variance, estimate_variance, fit_fold_slopes,
    mean_from_slopes, mean_over_partitions, moment_cache, sample_kurtosis, sample_mean_ci,
    sample_variance_ci, variance_from_slopes, z_value, Inference, MeanInference, MomentCache,
    MultiPartitionInference, VarianceInference,
};

pub type LabeledSetF64 = LabeledSet<f64>;
pub type UnlabeledSetF64 = UnlabeledSet<f64>;
pub type MomentCacheF64 = MomentCache<f64>;
pub type LearnerSpecF64 = LearnerSpec<f64>;
pub type MeanInferenceF64 = MeanInference<f64>;
pub type VarianceInferenceF64 = VarianceInference<f64>;
pub type CausalLabeledSetF64 = CausalLabeledSet<f64>;
pub type CausalUnlabeledSetF64 = CausalUnlabeledSet<f64>;
pub type AteInferenceF64 = AteInference<f64>;
pub type TesInferenceF64 = TesInference<f64>;

pub type LabeledSetF32 = LabeledSet<f32>;
pub type UnlabeledSetF32 = UnlabeledSet<f32>;
pub type MomentCacheF32 = MomentCache<f32>;
pub type LearnerSpecF32 = LearnerSpec<f32>;
pub type MeanInferenceF32 = MeanInference<f32>;
pub type VarianceInferenceF32 = VarianceInference<f32>;
