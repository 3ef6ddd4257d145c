//! Monte Carlo replication runner and the MSE / average length / coverage
//! summaries.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use ssinfer::{
    estimate_ate_tes, estimate_mean, estimate_mean_variance, make_partition, moment_cache, sample_ate,
    sample_mean_ci, sample_variance_ci, z_value, CausalLabeledSetF64, LearnerSpecF64, LogisticLasso, Penalty,
    TrimBounds, Variant,
};

use crate::error::{Result, SimError};
use crate::generate::{rep_rng, Dataset, Generator};
use crate::model::SimModel;
use crate::truth::TruthValues;

/// A run fails as a whole once more than this share of replications fail.
pub const MAX_FAILURE_RATE: f64 = 0.05;

/// Estimators applied to every replication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorBundle {
    pub k: usize,
    /// Outcome regression for the fold slopes (per arm for the treatment design).
    pub outcome: LearnerSpecF64,
    /// Penalized logistic propensity model for the treatment design.
    pub propensity: LearnerSpecF64,
    pub trim: TrimBounds,
}

impl Default for EstimatorBundle {
    fn default() -> Self {
        Self {
            k: 2,
            outcome: LearnerSpecF64::default(),
            propensity: LearnerSpecF64::new(Variant::Lasso, Penalty::CrossValidated),
            trim: TrimBounds::default(),
        }
    }
}

impl EstimatorBundle {
    pub fn with_outcome(outcome: LearnerSpecF64, k: usize) -> Self {
        Self {
            k,
            outcome,
            ..Self::default()
        }
    }
}

/// One estimator's output in one replication.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepRecord {
    pub estimate: f64,
    pub lo: f64,
    pub hi: f64,
}

impl RepRecord {
    pub fn new(estimate: f64, ci: (f64, f64)) -> Self {
        Self {
            estimate,
            lo: ci.0,
            hi: ci.1,
        }
    }
}

/// Aggregate performance of one estimator over the successful replications.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub name: String,
    pub target: f64,
    pub mse: f64,
    pub avg_length: f64,
    pub avg_coverage: f64,
    pub mean_estimate: f64,
    /// Sample standard deviation of the estimates across replications.
    pub sd_estimate: f64,
    pub reps: usize,
}

impl EstimatorSummary {
    /// Monte Carlo standard error of `mean_estimate`.
    pub fn mc_se(&self) -> f64 {
        self.sd_estimate / (self.reps as f64).sqrt()
    }
}

fn sorted_sum(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

/// Summarizes `records` against `target`. Sums run over sorted values, so
/// the result does not depend on replication order.
pub fn summarize(name: &str, target: f64, records: &[RepRecord]) -> EstimatorSummary {
    let r = records.len() as f64;
    let mean = sorted_sum(records.iter().map(|x| x.estimate).collect()) / r;
    let spread = sorted_sum(records.iter().map(|x| (x.estimate - mean).powi(2)).collect());
    let covered = records.iter().filter(|x| x.lo <= target && target <= x.hi).count();
    EstimatorSummary {
        name: name.to_string(),
        target,
        mse: sorted_sum(records.iter().map(|x| (x.estimate - target).powi(2)).collect()) / r,
        avg_length: sorted_sum(records.iter().map(|x| x.hi - x.lo).collect()) / r,
        avg_coverage: covered as f64 / r,
        mean_estimate: mean,
        sd_estimate: if records.len() > 1 { (spread / (r - 1.0)).sqrt() } else { 0.0 },
        reps: records.len(),
    }
}

/// Label-only contrast of arm means.
pub fn sample_ate_baseline(labeled: &CausalLabeledSetF64) -> Result<f64> {
    let d = labeled.treatments();
    if d.iter().all(|&t| t) || d.iter().all(|&t| !t) {
        return Err(SimError::Undefined("arm contrast needs both arms".into()));
    }
    Ok(sample_ate(labeled))
}

/// Arm-mean contrast with the unequal-variance normal interval.
pub fn sample_ate_interval(labeled: &CausalLabeledSetF64, alpha: f64) -> Result<RepRecord> {
    let est = sample_ate_baseline(labeled)?;
    let mut arms = [Vec::new(), Vec::new()];
    for (&y, &t) in labeled.responses().iter().zip(labeled.treatments()) {
        arms[usize::from(t)].push(y);
    }
    let mut se_sq = 0.0;
    for arm in &arms {
        let k = arm.len() as f64;
        if arm.len() < 2 {
            return Err(SimError::Undefined("arm variance needs two observations per arm".into()));
        }
        let mean = arm.iter().sum::<f64>() / k;
        se_sq += arm.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (k - 1.0) / k;
    }
    let half = z_value(alpha)? * se_sq.sqrt();
    Ok(RepRecord::new(est, (est - half, est + half)))
}

/// Estimator names and targets, in record order.
fn targets(model: &SimModel, truth: &TruthValues) -> Vec<(&'static str, f64)> {
    if model.variant.is_causal() {
        vec![
            ("sample_ate", truth.theta),
            ("ss_ate", truth.theta),
            ("ss_tes", truth.effect_size()),
        ]
    } else {
        vec![
            ("sample_mean", truth.theta),
            ("ss_mean", truth.theta),
            ("sample_variance", truth.sigma_y_sq),
            ("ss_variance", truth.sigma_y_sq),
        ]
    }
}

/// Runs every estimator of the bundle on one dataset.
pub fn evaluate(data: &Dataset, bundle: &EstimatorBundle, partition_seed: u64, alpha: f64) -> Result<Vec<RepRecord>> {
    match data {
        Dataset::Ssl { labeled, unlabeled } => {
            let cache = moment_cache(unlabeled)?;
            let part = make_partition(labeled.n(), bundle.k, partition_seed)?;
            let (mean, var) = estimate_mean_variance(labeled, &cache, &part, &bundle.outcome, alpha)?;
            let bm = sample_mean_ci(labeled.responses(), alpha)?;
            let bv = sample_variance_ci(labeled.responses(), alpha)?;
            Ok(vec![
                RepRecord::new(bm.estimate, bm.ci),
                RepRecord::new(mean.theta_hat, mean.ci),
                RepRecord::new(bv.estimate, bv.ci),
                RepRecord::new(var.sigma_y_sq_hat, var.ci),
            ])
        }
        Dataset::Causal { labeled, unlabeled } => {
            let part = make_partition(labeled.n(), bundle.k, partition_seed)?;
            let propensity = LogisticLasso {
                spec: bundle.propensity.clone(),
                trim: bundle.trim,
            };
            let (ate, tes) =
                estimate_ate_tes(labeled, unlabeled, &part, &bundle.outcome, &propensity, bundle.trim, alpha)?;
            Ok(vec![
                sample_ate_interval(labeled, alpha)?,
                RepRecord::new(ate.delta_hat, ate.ci),
                RepRecord::new(tes.d_hat, tes.ci),
            ])
        }
    }
}

/// Results of a Monte Carlo study.
#[derive(Debug, Clone, Serialize)]
pub struct McReport {
    pub model: SimModel,
    pub bundle: EstimatorBundle,
    pub alpha: f64,
    pub reps: usize,
    pub failures: usize,
    pub truth: TruthValues,
    /// Set for the treatment design, which is defined by this harness rather
    /// than taken from the reference study.
    pub harness_defined: bool,
    pub estimators: Vec<EstimatorSummary>,
}

pub const TABLE_HEADER: &str = "m,n,p,s0,MSE_base,MSE_ss,AL_base,AL_ss,AC_base,AC_ss";

impl McReport {
    pub fn estimator(&self, name: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.name == name)
    }

    /// Table rows comparing each label-only baseline with its semi-supervised
    /// counterpart, as `(target, row)`: mean then variance, or the treatment
    /// effect alone. Columns follow [`TABLE_HEADER`].
    pub fn table_rows(&self) -> Vec<(&'static str, String)> {
        let pairs: &[(&str, &str, &str)] = if self.model.variant.is_causal() {
            &[("ate", "sample_ate", "ss_ate")]
        } else {
            &[("mean", "sample_mean", "ss_mean"), ("variance", "sample_variance", "ss_variance")]
        };
        pairs
            .iter()
            .filter_map(|&(target, base, ss)| {
                let (b, s) = (self.estimator(base)?, self.estimator(ss)?);
                let m = &self.model;
                Some((
                    target,
                    format!(
                        "{},{},{},{},{},{},{},{},{},{}",
                        m.m, m.n, m.p, m.s0, b.mse, s.mse, b.avg_length, s.avg_length, b.avg_coverage, s.avg_coverage
                    ),
                ))
            })
            .collect()
    }
}

fn check_failures(failed: usize, reps: usize, first: Option<String>) -> Result<()> {
    if failed as f64 > MAX_FAILURE_RATE * reps as f64 {
        return Err(SimError::TooManyFailures {
            failed,
            reps,
            first: first.unwrap_or_default(),
        });
    }
    Ok(())
}

/// Replication `rep`: its dataset and the partition seed drawn after it.
fn replicate(g: &Generator, rep: u64) -> Result<(Dataset, u64)> {
    let mut rng = rep_rng(g.model().seed, rep);
    let data = g.draw(&mut rng)?;
    Ok((data, rng.random()))
}

/// Runs `reps` replications of `model` in parallel. Each replication's data
/// and fold partition depend only on `(model.seed, rep)`.
pub fn run_mc(model: &SimModel, bundle: &EstimatorBundle, reps: usize, alpha: f64) -> Result<McReport> {
    if reps == 0 {
        return Err(SimError::invalid("reps must be at least 1"));
    }
    z_value(alpha)?;
    bundle.outcome.validate()?;
    let g = Generator::new(model)?;
    let truth = g.truth();
    let outcomes: Vec<Result<Vec<RepRecord>>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let (data, seed) = replicate(&g, rep)?;
            evaluate(&data, bundle, seed, alpha)
        })
        .collect();
    let first = outcomes.iter().find_map(|o| o.as_ref().err().map(|e| e.to_string()));
    let ok: Vec<Vec<RepRecord>> = outcomes.into_iter().filter_map(|o| o.ok()).collect();
    let failures = reps - ok.len();
    check_failures(failures, reps, first)?;
    let estimators = targets(model, &truth)
        .into_iter()
        .enumerate()
        .map(|(j, (name, target))| {
            let column: Vec<RepRecord> = ok.iter().map(|r| r[j]).collect();
            summarize(name, target, &column)
        })
        .collect();
    Ok(McReport {
        model: model.clone(),
        bundle: bundle.clone(),
        alpha,
        reps,
        failures,
        truth,
        harness_defined: model.variant.is_causal(),
        estimators,
    })
}

/// Mean squared errors at one fold count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KSweepPoint {
    pub k: usize,
    pub mse_base: f64,
    pub mse_ss: f64,
    pub reps: usize,
}

pub const K_SWEEP_HEADER: &str = "k,mse_base,mse_ss";

impl KSweepPoint {
    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.k, self.mse_base, self.mse_ss)
    }
}

/// Mean estimation error as a function of the number of folds. Every fold
/// count sees the same replicated datasets; a replication failing at any
/// fold count is dropped from all of them.
pub fn k_sweep(model: &SimModel, learner: &LearnerSpecF64, ks: &[usize], reps: usize, alpha: f64) -> Result<Vec<KSweepPoint>> {
    if reps == 0 || ks.is_empty() {
        return Err(SimError::invalid("k sweep needs at least one replication and one fold count"));
    }
    if model.variant.is_causal() {
        return Err(SimError::invalid("k sweep is defined for the mean models"));
    }
    learner.validate()?;
    let g = Generator::new(model)?;
    let theta = g.truth().theta;
    let outcomes: Vec<Result<(f64, Vec<f64>)>> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let (data, seed) = replicate(&g, rep)?;
            let Dataset::Ssl { labeled, unlabeled } = data else {
                unreachable!("mean models produce unlabeled covariates")
            };
            let cache = moment_cache(&unlabeled)?;
            let ybar = labeled.responses().mean().expect("labeled set is nonempty");
            let per_k = ks
                .iter()
                .map(|&k| {
                    let part = make_partition(labeled.n(), k, seed)?;
                    Ok(estimate_mean(&labeled, &cache, &part, learner, alpha)?.theta_hat)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((ybar, per_k))
        })
        .collect();
    let first = outcomes.iter().find_map(|o| o.as_ref().err().map(|e| e.to_string()));
    let ok: Vec<(f64, Vec<f64>)> = outcomes.into_iter().filter_map(|o| o.ok()).collect();
    check_failures(reps - ok.len(), reps, first)?;
    let r = ok.len() as f64;
    let mse_base = sorted_sum(ok.iter().map(|(b, _)| (b - theta).powi(2)).collect()) / r;
    Ok(ks
        .iter()
        .enumerate()
        .map(|(j, &k)| KSweepPoint {
            k,
            mse_base,
            mse_ss: sorted_sum(ok.iter().map(|(_, v)| (v[j] - theta).powi(2)).collect()) / r,
            reps: ok.len(),
        })
        .collect())
}
