//! Population efficiency gain of the semi-supervised variance estimator.
//!
//! With `m ≫ n`, the asymptotic variance of the sample variance is
//! `Var (Y - θ)²` and that of the semi-supervised estimator is
//! `Var(ε² + 2 β*ᵀṼ ε)`. The proportion of the decrease,
//! `r = 1 - Var(ε² + 2 β*ᵀṼ ε) / Var (Y - θ)²`, is evaluated by plug-in
//! Monte Carlo on a large oracle sample.

use ndarray::{ArrayView1, ArrayView2, Axis};
use serde::Serialize;
use ssinfer::nuisance::fit_ols;

use crate::error::{Result, SimError};
use crate::generate::{rep_rng, Generator};
use crate::model::SimModel;

pub const MIN_ORACLE_DRAWS: usize = 100_000;
const BATCHES: usize = 50;
/// Stream reserved for oracle draws, disjoint from replication streams.
const ORACLE_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioEstimate {
    pub a: f64,
    pub r: f64,
    /// Batch-means standard error of `r`.
    pub se: f64,
    pub draws: usize,
}

pub const R_STUDY_HEADER: &str = "a,r,se";

impl RatioEstimate {
    pub fn csv_row(&self) -> String {
        format!("{},{},{}", self.a, self.r, self.se)
    }
}

fn variance(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    v.map(|x| (x - mean).powi(2)).sum::<f64>() / n
}

fn ratio(base: &[f64], ss: &[f64]) -> Result<f64> {
    let vb = variance(base.iter().copied());
    if !(vb > f64::EPSILON * base.iter().map(|v| v * v).sum::<f64>() / base.len() as f64) {
        return Err(SimError::Undefined("Var (Y - θ)² is numerically zero".into()));
    }
    Ok(1.0 - variance(ss.iter().copied()) / vb)
}

/// `(r, se)` from draws of covariates `x` (raw, without intercept) and
/// responses `y`. `β*`, `θ` and `μ` are the least-squares and sample-mean
/// plug-ins on the same draws.
pub fn ratio_from_draws(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>) -> Result<(f64, f64)> {
    let n = y.len();
    if n < 2 * BATCHES {
        return Err(SimError::invalid(format!("need at least {} draws", 2 * BATCHES)));
    }
    let beta = fit_ols(x, y)?.coefficients;
    let slope = beta.slice(ndarray::s![1..]);
    let mu = x.mean_axis(Axis(0)).expect("nonempty draws");
    let theta = y.mean().expect("nonempty draws");
    let mut base = Vec::with_capacity(n);
    let mut ss = Vec::with_capacity(n);
    for (row, &yi) in x.axis_iter(Axis(0)).zip(y) {
        let eps = yi - beta[0] - row.dot(&slope);
        let proj = (&row - &mu).dot(&slope);
        base.push((yi - theta).powi(2));
        ss.push(eps * eps + 2.0 * proj * eps);
    }
    let r = ratio(&base, &ss)?;
    let size = n / BATCHES;
    let batch: Vec<f64> = (0..BATCHES)
        .map(|b| ratio(&base[b * size..(b + 1) * size], &ss[b * size..(b + 1) * size]))
        .collect::<Result<_>>()?;
    let se = variance(batch.iter().copied()).sqrt() * (BATCHES as f64 / (BATCHES as f64 - 1.0)).sqrt()
        / (BATCHES as f64).sqrt();
    Ok((r, se))
}

/// `r` for an example model at deviation size `a`.
pub fn proportionality_r(model: &SimModel, a: f64, draws: usize) -> Result<RatioEstimate> {
    if !model.variant.is_example() {
        return Err(SimError::invalid(format!("{} is not one of the examples", model.variant)));
    }
    if draws < MIN_ORACLE_DRAWS {
        return Err(SimError::invalid(format!("oracle draws {draws} below {MIN_ORACLE_DRAWS}")));
    }
    let g = Generator::new(&model.clone().with_a(a))?;
    let mut rng = rep_rng(model.seed, ORACLE_STREAM);
    let x = g.covariates(draws, &mut rng);
    let y = g.responses(&x, &mut rng);
    let (r, se) = ratio_from_draws(x.view(), y.view())?;
    Ok(RatioEstimate { a, r, se, draws })
}

/// `r` over a grid of deviation sizes.
pub fn r_study(model: &SimModel, grid: &[f64], draws: usize) -> Result<Vec<RatioEstimate>> {
    grid.iter().map(|&a| proportionality_r(model, a, draws)).collect()
}
