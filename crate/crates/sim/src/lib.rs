//! Synthetic designs and Monte Carlo studies for the `ssinfer` estimators.
//!
//! [`Generator`] draws labeled and unlabeled samples for each
//! [`ModelVariant`] together with the true targets, [`run_mc`] replicates an
//! estimator bundle and reports mean squared error, average interval length
//! and coverage, [`k_sweep`] tracks the error across fold counts and
//! [`proportionality_r`] evaluates the population efficiency gain of the
//! variance estimator for the two low-dimensional examples.

// `!(x > y)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod generate;
pub mod mc;
pub mod model;
pub mod ratio;
pub mod truth;

pub use design::{build_c1, c1_sqrt, d1_diagonal, equicorrelation_basis};
pub use error::{Result, SimError};
pub use generate::{generate, rep_rng, Dataset, Generator};
pub use mc::{
    evaluate, k_sweep, run_mc, sample_ate_baseline, sample_ate_interval, summarize, EstimatorBundle,
    EstimatorSummary, KSweepPoint, McReport, RepRecord, K_SWEEP_HEADER, TABLE_HEADER,
};
pub use model::{ModelVariant, SimModel};
pub use ratio::{proportionality_r, r_study, ratio_from_draws, RatioEstimate, R_STUDY_HEADER};
pub use truth::{TruthSource, TruthValues};
