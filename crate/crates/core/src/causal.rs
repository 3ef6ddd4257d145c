//! Semi-supervised average treatment effect and treatment effect size.
//!
//! Each fold gets two outcome slopes (fit on the treated and control rows of
//! its complement) and a propensity model (fit on the whole complement). The
//! effect estimate reweights the fold's outcome residuals by the inverse
//! trimmed propensity and anchors the regression part at the unlabeled mean.

use ndarray::{concatenate, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::Serialize;

use crate::data::{augment, FoldPartition, TrimBounds};
use crate::error::{Error, Result};
use crate::nuisance::{PropensityLearner, PropensityModel, SlopeLearner};
use crate::scalar::Scalar;
use crate::ssl::{check_partition, cross_fit, z_value, MomentCache};

fn validate_arms(treatments: &[bool], what: &str) -> Result<()> {
    let treated = treatments.iter().filter(|&&d| d).count();
    if treated == 0 || treated == treatments.len() {
        return Err(Error::invalid(format!("{what} must contain both treated and control rows")));
    }
    Ok(())
}

fn validate_covariates<T: Scalar>(x: ArrayView2<'_, T>) -> Result<()> {
    if let Some(((row, col), _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { row, col });
    }
    Ok(())
}

/// `(D x, (1 - D) x)` for each row of an augmented design.
fn stack_arms<T: Scalar>(design: ArrayView2<'_, T>, treatments: &[bool]) -> Array2<T> {
    let (r, p) = design.dim();
    let mut w = Array2::<T>::zeros((r, 2 * p));
    for (i, &d) in treatments.iter().enumerate() {
        let offset = if d { 0 } else { p };
        w.row_mut(i).slice_mut(ndarray::s![offset..offset + p]).assign(&design.row(i));
    }
    w
}

/// Labeled observations with a binary treatment.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalLabeledSet<T> {
    responses: Array1<T>,
    treatments: Vec<bool>,
    covariates: Array2<T>,
}

impl<T: Scalar> CausalLabeledSet<T> {
    pub fn new(responses: Array1<T>, treatments: Vec<bool>, covariates: Array2<T>) -> Result<Self> {
        let n = responses.len();
        if covariates.nrows() != n || treatments.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{n} responses, {} treatments and {} covariate rows",
                treatments.len(),
                covariates.nrows()
            )));
        }
        if let Some(row) = responses.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col: 0 });
        }
        validate_covariates(covariates.view())?;
        validate_arms(&treatments, "labeled set")?;
        Ok(Self {
            responses,
            treatments,
            covariates,
        })
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn responses(&self) -> ArrayView1<'_, T> {
        self.responses.view()
    }

    pub fn treatments(&self) -> &[bool] {
        &self.treatments
    }

    pub fn covariates(&self) -> ArrayView2<'_, T> {
        self.covariates.view()
    }

    pub fn design(&self) -> Array2<T> {
        augment(self.covariates.view())
    }

    /// Arm-stacked design of width `2p`.
    pub fn stacked_design(&self) -> Array2<T> {
        stack_arms(self.design().view(), &self.treatments)
    }

    /// The same data with treatment and control swapped.
    pub fn swap_arms(&self) -> Self {
        Self {
            responses: self.responses.clone(),
            treatments: self.treatments.iter().map(|d| !d).collect(),
            covariates: self.covariates.clone(),
        }
    }
}

/// Unlabeled covariates with their treatment indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalUnlabeledSet<T> {
    treatments: Vec<bool>,
    covariates: Array2<T>,
}

impl<T: Scalar> CausalUnlabeledSet<T> {
    pub fn new(treatments: Vec<bool>, covariates: Array2<T>) -> Result<Self> {
        if treatments.len() != covariates.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} treatments but {} covariate rows",
                treatments.len(),
                covariates.nrows()
            )));
        }
        validate_covariates(covariates.view())?;
        validate_arms(&treatments, "unlabeled set")?;
        Ok(Self { treatments, covariates })
    }

    pub fn m(&self) -> usize {
        self.treatments.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn treatments(&self) -> &[bool] {
        &self.treatments
    }

    pub fn covariates(&self) -> ArrayView2<'_, T> {
        self.covariates.view()
    }

    pub fn stacked_design(&self) -> Array2<T> {
        stack_arms(augment(self.covariates.view()).view(), &self.treatments)
    }

    pub fn swap_arms(&self) -> Self {
        Self {
            treatments: self.treatments.iter().map(|d| !d).collect(),
            covariates: self.covariates.clone(),
        }
    }
}

/// Nuisance fits for one fold, all trained on its complement.
pub struct FoldNuisance<T: Scalar> {
    /// Outcome slope for the treated arm, intercept first.
    pub beta1: Array1<T>,
    pub beta0: Array1<T>,
    pub propensity: Box<dyn PropensityModel<T>>,
}

/// Fits the per-arm outcome slopes and the propensity model on each fold
/// complement, in parallel.
pub fn fit_fold_nuisances<T, L, P>(
    labeled: &CausalLabeledSet<T>,
    partition: &FoldPartition,
    outcome: &L,
    propensity: &P,
) -> Result<Vec<FoldNuisance<T>>>
where
    T: Scalar,
    L: SlopeLearner<T> + ?Sized,
    P: PropensityLearner<T> + ?Sized,
{
    check_partition(partition, labeled.n())?;
    let x = labeled.covariates();
    let y = labeled.responses();
    let d = labeled.treatments();
    let fits: Vec<Result<FoldNuisance<T>>> = (0..partition.k())
        .into_par_iter()
        .map(|k| {
            let rows = partition.complement(k);
            let (treated, control): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| d[i]);
            if treated.is_empty() || control.is_empty() {
                let arm = if treated.is_empty() { "treated" } else { "control" };
                return Err(Error::FoldDegenerate {
                    fold: k,
                    reason: format!("no {arm} rows in the fold complement"),
                });
            }
            let fit_arm = |arm: &[usize]| {
                let xa = x.select(Axis(0), arm);
                let ya = y.select(Axis(0), arm);
                outcome.fit(xa.view(), ya.view()).map(|f| f.coefficients)
            };
            let beta1 = fit_arm(&treated).map_err(|e| e.in_fold(k))?;
            let beta0 = fit_arm(&control).map_err(|e| e.in_fold(k))?;
            let xc = x.select(Axis(0), &rows);
            let dc: Vec<bool> = rows.iter().map(|&i| d[i]).collect();
            let propensity = propensity.fit(xc.view(), &dc).map_err(|e| e.in_fold(k))?;
            Ok(FoldNuisance { beta1, beta0, propensity })
        })
        .collect();
    fits.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AteInference<T> {
    pub delta_hat: T,
    pub tau1_hat: T,
    pub tau0_hat: T,
    /// `tau1 - tau0` for each fold.
    pub per_fold: Vec<T>,
    #[serde(rename = "V1")]
    pub v1: T,
    #[serde(rename = "V2")]
    pub v2: T,
    #[serde(rename = "V_delta")]
    pub v_delta: T,
    pub ci: (T, T),
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TesInference<T> {
    pub d_hat: T,
    pub delta_hat: T,
    /// Semi-supervised estimate of the response variance; may be negative,
    /// in which case the estimate is flagged degenerate.
    pub sigma_sq_hat: T,
    pub sigma_hat: T,
    #[serde(rename = "V3")]
    pub v3: T,
    #[serde(rename = "V4")]
    pub v4: T,
    #[serde(rename = "V_d")]
    pub v_d: T,
    pub ci: (T, T),
    /// Set when the variance estimate is not positive; `d_hat` and the
    /// interval are then 0.
    pub degenerate: bool,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
}

struct AteParts<T> {
    inference: AteInference<T>,
    folds: Vec<Vec<usize>>,
    nu: Array1<T>,
    xi: Array1<T>,
}

fn check_causal_inputs<T: Scalar>(
    labeled: &CausalLabeledSet<T>,
    unlabeled: &CausalUnlabeledSet<T>,
    partition: &FoldPartition,
    nuisances: &[FoldNuisance<T>],
) -> Result<()> {
    check_partition(partition, labeled.n())?;
    if labeled.n_covariates() != unlabeled.n_covariates() {
        return Err(Error::DimensionMismatch(format!(
            "labeled set has {} covariates, unlabeled set {}",
            labeled.n_covariates(),
            unlabeled.n_covariates()
        )));
    }
    if nuisances.len() != partition.k() {
        return Err(Error::DimensionMismatch(format!(
            "{} nuisance fits for {} folds",
            nuisances.len(),
            partition.k()
        )));
    }
    let p = labeled.n_covariates() + 1;
    for (k, nu) in nuisances.iter().enumerate() {
        if nu.beta1.len() != p || nu.beta0.len() != p {
            return Err(Error::DimensionMismatch(format!("outcome slopes for fold {k} must have length {p}")));
        }
    }
    Ok(())
}

fn ate_parts<T: Scalar>(
    labeled: &CausalLabeledSet<T>,
    unlabeled: &CausalUnlabeledSet<T>,
    partition: &FoldPartition,
    nuisances: &[FoldNuisance<T>],
    trim: TrimBounds,
    alpha: f64,
) -> Result<AteParts<T>> {
    check_causal_inputs(labeled, unlabeled, partition, nuisances)?;
    let z = z_value(alpha)?;
    let n = labeled.n();
    let m = unlabeled.m();
    let y = labeled.responses();
    let d = labeled.treatments();
    let design = labeled.design();
    let mu = augment(unlabeled.covariates()).mean_axis(Axis(0)).expect("unlabeled set is nonempty");
    let folds = partition.folds();
    let kf = T::from_count(folds.len());

    // per-row weighted residual difference, before centering
    let mut raw = Array1::<T>::zeros(n);
    let mut xi = Array1::<T>::zeros(n);
    let mut tau1 = Vec::with_capacity(folds.len());
    let mut tau0 = Vec::with_capacity(folds.len());
    let mut anchor = Vec::with_capacity(folds.len());
    for (fold, nu) in folds.iter().zip(nuisances) {
        let size = T::from_count(fold.len());
        let diff = &nu.beta1 - &nu.beta0;
        let (mut s1, mut s0) = (T::zero(), T::zero());
        for &i in fold {
            let row = design.row(i);
            let e = trim.clip(nu.propensity.predict(labeled.covariates().row(i)));
            let (r, rho) = if d[i] { (T::one() / e, T::zero()) } else { (T::zero(), T::one() / (T::one() - e)) };
            let a1 = r * (y[i] - nu.beta1.dot(&row));
            let a0 = rho * (y[i] - nu.beta0.dot(&row));
            s1 += a1;
            s0 += a0;
            raw[i] = a1 - a0;
            xi[i] = row.iter().zip(mu.iter()).zip(diff.iter()).map(|((&x, &u), &b)| b * (x - u)).sum();
        }
        tau1.push(nu.beta1.dot(&mu) + s1 / size);
        tau0.push(nu.beta0.dot(&mu) + s0 / size);
        anchor.push(diff.dot(&mu));
    }
    let per_fold: Vec<T> = tau1.iter().zip(&tau0).map(|(&a, &b)| a - b).collect();
    let delta_hat = per_fold.iter().copied().sum::<T>() / kf;
    let tau1_hat = tau1.iter().copied().sum::<T>() / kf;
    let tau0_hat = tau0.iter().copied().sum::<T>() / kf;

    let mut nu_delta = Array1::<T>::zeros(n);
    let (mut v1, mut v2) = (T::zero(), T::zero());
    for (fold, &a) in folds.iter().zip(&anchor) {
        let size = T::from_count(fold.len());
        let e_delta = delta_hat - a;
        let (mut s1, mut s2) = (T::zero(), T::zero());
        for &i in fold {
            nu_delta[i] = raw[i] - e_delta;
            s1 += nu_delta[i] * nu_delta[i];
            s2 += xi[i] * xi[i];
        }
        v1 += s1 / size;
        v2 += s2 / size;
    }
    v1 /= kf;
    v2 /= kf;
    let v_delta = v1 + T::from_count(n) / T::from_count(m) * v2;
    let half = T::lit(z) * (v_delta / T::from_count(n)).sqrt();
    Ok(AteParts {
        inference: AteInference {
            delta_hat,
            tau1_hat,
            tau0_hat,
            per_fold,
            v1,
            v2,
            v_delta,
            ci: (delta_hat - half, delta_hat + half),
            n,
            m,
            k: folds.len(),
            alpha,
        },
        folds,
        nu: nu_delta,
        xi,
    })
}

/// Treatment effect from given per-fold nuisances. Propensities are
/// clipped to `trim` before weighting.
pub fn ate_with_nuisances<T: Scalar>(
    labeled: &CausalLabeledSet<T>,
    unlabeled: &CausalUnlabeledSet<T>,
    partition: &FoldPartition,
    nuisances: &[FoldNuisance<T>],
    trim: TrimBounds,
    alpha: f64,
) -> Result<AteInference<T>> {
    Ok(ate_parts(labeled, unlabeled, partition, nuisances, trim, alpha)?.inference)
}

/// Treatment effect and effect size from given per-fold nuisances. The
/// arm-stacked slope for fold `k` is `(beta1, beta0)`, which is the least
/// squares fit on the stacked design because the two blocks never overlap.
pub fn ate_tes_with_nuisances<T: Scalar>(
    labeled: &CausalLabeledSet<T>,
    unlabeled: &CausalUnlabeledSet<T>,
    partition: &FoldPartition,
    nuisances: &[FoldNuisance<T>],
    trim: TrimBounds,
    alpha: f64,
) -> Result<(AteInference<T>, TesInference<T>)> {
    let ate = ate_parts(labeled, unlabeled, partition, nuisances, trim, alpha)?;
    let z = z_value(alpha)?;
    let y = labeled.responses();
    let cache = MomentCache::from_design(unlabeled.stacked_design().view())?;
    let slopes: Vec<Array1<T>> = nuisances
        .iter()
        .map(|nu| concatenate![Axis(0), nu.beta1, nu.beta0])
        .collect();
    let cf = cross_fit(y, labeled.stacked_design().view(), &cache, partition, &slopes)?;
    let parts = cf.variance_parts(y);

    let AteParts { inference, folds, nu: nu_delta, xi: xi_delta } = ate;
    let (n, m, k) = (inference.n, inference.m, inference.k);
    let sigma_sq_hat = parts.sigma_sq;
    let zero = T::zero();
    let mut tes = TesInference {
        d_hat: zero,
        delta_hat: inference.delta_hat,
        sigma_sq_hat,
        sigma_hat: zero,
        v3: zero,
        v4: zero,
        v_d: zero,
        ci: (zero, zero),
        degenerate: true,
        n,
        m,
        k,
        alpha,
    };
    if sigma_sq_hat > zero {
        let sigma = sigma_sq_hat.sqrt();
        let delta = inference.delta_hat;
        let corr = delta / (T::lit(2.0) * sigma.powi(3));
        let (mut v3, mut v4) = (zero, zero);
        for fold in &folds {
            let size = T::from_count(fold.len());
            let (mut s3, mut s4) = (zero, zero);
            for &i in fold {
                let nu_d = nu_delta[i] / sigma - corr * parts.nu[i];
                let xi_d = xi_delta[i] / sigma - corr * parts.xi[i];
                s3 += nu_d * nu_d;
                s4 += xi_d * xi_d;
            }
            v3 += s3 / size;
            v4 += s4 / size;
        }
        let kf = T::from_count(k);
        v3 /= kf;
        v4 /= kf;
        let v_d = v3 + T::from_count(n) / T::from_count(m) * v4;
        let d_hat = delta / sigma;
        let half = T::lit(z) * (v_d / T::from_count(n)).sqrt();
        tes = TesInference {
            d_hat,
            sigma_hat: sigma,
            v3,
            v4,
            v_d,
            ci: (d_hat - half, d_hat + half),
            degenerate: false,
            ..tes
        };
    }
    Ok((inference, tes))
}

pub fn estimate_ate<T, L, P>(
    labeled: &CausalLabeledSet<T>,
    unlabeled: &CausalUnlabeledSet<T>,
    partition: &FoldPartition,
    outcome: &L,
    propensity: &P,
    trim: TrimBounds,
    alpha: f64,
) -> Result<AteInference<T>>
where
    T: Scalar,
    L: SlopeLearner<T> + ?Sized,
    P: PropensityLearner<T> + ?Sized,
{
    let nuisances = fit_fold_nuisances(labeled, partition, outcome, propensity)?;
    ate_with_nuisances(labeled, unlabeled, partition, &nuisances, trim, alpha)
}

pub fn estimate_tes<T, L, P>(
    labeled: &CausalLabeledSet<T>,
    unlabeled: &CausalUnlabeledSet<T>,
    partition: &FoldPartition,
    outcome: &L,
    propensity: &P,
    trim: TrimBounds,
    alpha: f64,
) -> Result<TesInference<T>>
where
    T: Scalar,
    L: SlopeLearner<T> + ?Sized,
    P: PropensityLearner<T> + ?Sized,
{
    Ok(estimate_ate_tes(labeled, unlabeled, partition, outcome, propensity, trim, alpha)?.1)
}

/// Both causal estimates from one set of nuisance fits.
pub fn estimate_ate_tes<T, L, P>(
    labeled: &CausalLabeledSet<T>,
    unlabeled: &CausalUnlabeledSet<T>,
    partition: &FoldPartition,
    outcome: &L,
    propensity: &P,
    trim: TrimBounds,
    alpha: f64,
) -> Result<(AteInference<T>, TesInference<T>)>
where
    T: Scalar,
    L: SlopeLearner<T> + ?Sized,
    P: PropensityLearner<T> + ?Sized,
{
    let nuisances = fit_fold_nuisances(labeled, partition, outcome, propensity)?;
    ate_tes_with_nuisances(labeled, unlabeled, partition, &nuisances, trim, alpha)
}

/// Difference of arm means of the labeled responses.
pub fn sample_ate<T: Scalar>(labeled: &CausalLabeledSet<T>) -> T {
    let (mut s1, mut n1, mut s0, mut n0) = (T::zero(), 0, T::zero(), 0);
    for (&y, &d) in labeled.responses().iter().zip(labeled.treatments()) {
        if d {
            s1 += y;
            n1 += 1;
        } else {
            s0 += y;
            n0 += 1;
        }
    }
    s1 / T::from_count(n1) - s0 / T::from_count(n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nuisance::ConstantPropensity;
    use ndarray::array;

    fn injected(k: usize, p: usize, e: f64) -> Vec<FoldNuisance<f64>> {
        (0..k)
            .map(|_| FoldNuisance {
                beta1: Array1::zeros(p),
                beta0: Array1::zeros(p),
                propensity: Box::new(ConstantPropensity(e)),
            })
            .collect()
    }

    #[test]
    fn half_propensity_fold_arithmetic() {
        let l = CausalLabeledSet::new(
            array![3.0, 1.0, 5.0, 2.0],
            vec![true, false, true, false],
            array![[0.1], [0.2], [0.3], [0.4]],
        )
        .unwrap();
        let u = CausalUnlabeledSet::new(vec![true, false], array![[0.0], [1.0]]).unwrap();
        let part = FoldPartition::from_assignment(2, vec![0, 0, 1, 1]).unwrap();
        let ate = ate_with_nuisances(&l, &u, &part, &injected(2, 2, 0.5), TrimBounds::default(), 0.05).unwrap();
        // fold 0: tau1 = 2*3/2 = 3, tau0 = 2*1/2 = 1
        assert_eq!(ate.per_fold[0], 2.0);
        assert_eq!(ate.per_fold[1], 3.0);
        assert_eq!(ate.delta_hat, 2.5);
        assert_eq!(ate.v2, 0.0);
    }

    #[test]
    fn single_arm_rejected() {
        let err = CausalLabeledSet::new(array![1.0, 2.0], vec![true, true], array![[0.0], [1.0]]);
        assert!(err.is_err());
    }

    #[test]
    fn stacked_design_blocks() {
        let l = CausalLabeledSet::new(array![1.0, 2.0], vec![true, false], array![[5.0], [7.0]]).unwrap();
        assert_eq!(l.stacked_design(), array![[1.0, 5.0, 0.0, 0.0], [0.0, 0.0, 1.0, 7.0]]);
    }

    #[test]
    fn constant_response_gives_zero_effect_size() {
        let l = CausalLabeledSet::new(
            array![2.0, 2.0, 2.0, 2.0],
            vec![true, false, true, false],
            array![[0.1], [0.2], [0.3], [0.4]],
        )
        .unwrap();
        let u = CausalUnlabeledSet::new(vec![true, false], array![[0.0], [1.0]]).unwrap();
        let part = FoldPartition::from_assignment(2, vec![0, 0, 1, 1]).unwrap();
        let (_, tes) = ate_tes_with_nuisances(&l, &u, &part, &injected(2, 2, 0.5), TrimBounds::default(), 0.05).unwrap();
        assert_eq!(tes.d_hat, 0.0);
        assert!(tes.degenerate);
        assert_eq!(tes.ci, (0.0, 0.0));
    }
}
