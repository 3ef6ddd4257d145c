//! Cross-fitted semi-supervised estimators of the mean and variance of a
//! response, with their plug-in asymptotic variances and intervals.
//!
//! Every estimator follows the same pattern: fit a slope `b_k` on the
//! complement of each fold, then combine the fold residuals with the
//! unlabeled moments `mu` and `C`. The `*_from_slopes` functions take the
//! slopes as given, which is how the learner-free behavior is tested.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{augment, make_partition, FoldPartition, LabeledSet, UnlabeledSet};
use crate::error::{Error, Result};
use crate::nuisance::{SlopeFit, SlopeLearner};
use crate::scalar::Scalar;

/// Two-sided standard normal critical value `z_{1 - alpha/2}`.
pub fn z_value(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(Normal::standard().inverse_cdf(1.0 - alpha / 2.0))
}

fn interval<T: Scalar>(center: T, var: T, n: usize, z: f64) -> (T, T) {
    let half = T::lit(z) * (var / T::from_count(n)).sqrt();
    (center - half, center + half)
}

/// Location and spread of the augmented unlabeled design.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCache<T> {
    mu_hat: Array1<T>,
    c_hat: Array2<T>,
    m: usize,
}

impl<T: Scalar> MomentCache<T> {
    /// Moments of the rows of an arbitrary design, used as is.
    pub fn from_design(design: ArrayView2<'_, T>) -> Result<Self> {
        let (m, p) = design.dim();
        if m == 0 {
            return Err(Error::invalid("unlabeled set is empty"));
        }
        let mf = T::from_count(m);
        let mu_hat = design.sum_axis(Axis(0)).mapv(|s| s / mf);
        let centered = &design - &mu_hat;
        let mut c_hat = centered.t().dot(&centered);
        for i in 0..p {
            for j in 0..i {
                let v = (c_hat[[i, j]] + c_hat[[j, i]]) / T::lit(2.0);
                c_hat[[i, j]] = v;
                c_hat[[j, i]] = v;
            }
        }
        c_hat.mapv_inplace(|v| v / mf);
        Ok(Self { mu_hat, c_hat, m })
    }

    pub fn mu_hat(&self) -> ArrayView1<'_, T> {
        self.mu_hat.view()
    }

    pub fn c_hat(&self) -> ArrayView2<'_, T> {
        self.c_hat.view()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.mu_hat.len()
    }

    /// `b' C b`.
    pub fn quad_form(&self, b: ArrayView1<'_, T>) -> T {
        self.c_hat.dot(&b).dot(&b)
    }
}

/// Moments of the augmented unlabeled covariates `(1, X)`.
pub fn moment_cache<T: Scalar>(unlabeled: &UnlabeledSet<T>) -> Result<MomentCache<T>> {
    MomentCache::from_design(augment(unlabeled.covariates()).view())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeanInference<T> {
    pub theta_hat: T,
    pub per_fold: Vec<T>,
    pub sigma_eps_sq: T,
    /// Raw plug-in; may be negative. The interval uses `max(b_sq, 0)`.
    pub b_sq: T,
    pub var_hat: T,
    pub ci: (T, T),
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VarianceInference<T> {
    pub sigma_y_sq_hat: T,
    pub per_fold: Vec<T>,
    pub sigma_xi_sq: T,
    pub sigma_nu_sq: T,
    pub var_hat: T,
    pub ci: (T, T),
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiPartitionInference<T> {
    pub theta_bar: T,
    pub var_bar: T,
    pub estimates: Vec<T>,
    pub variances: Vec<T>,
    pub seeds: Vec<u64>,
    pub ci: (T, T),
    pub n: usize,
    pub alpha: f64,
}

/// A point estimate with a two-sided interval, used by the label-only
/// baselines.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inference<T> {
    pub estimate: T,
    pub ci: (T, T),
    pub n: usize,
    pub alpha: f64,
}

/// Per-row and per-fold quantities shared by the mean and variance
/// estimators for one set of fold slopes.
#[derive(Debug, Clone)]
pub(crate) struct CrossFit<T> {
    pub folds: Vec<Vec<usize>>,
    pub per_fold_theta: Vec<T>,
    pub theta_hat: T,
    /// `b_k' (W_i - mu)` for the fold containing row `i`.
    pub proj: Array1<T>,
    /// `b_k' C b_k` per fold.
    pub quad: Vec<T>,
    pub n: usize,
    pub m: usize,
}

pub(crate) fn check_partition(partition: &FoldPartition, n: usize) -> Result<()> {
    if partition.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "partition covers {} rows but the labeled set has {n}",
            partition.n()
        )));
    }
    if partition.k() < 2 {
        return Err(Error::invalid("cross-fitting needs at least 2 folds"));
    }
    Ok(())
}

/// `y` is length `n`, `design` is `n x p` in the same coordinates as the
/// cache, one slope of length `p` per fold.
pub(crate) fn cross_fit<T: Scalar>(
    y: ArrayView1<'_, T>,
    design: ArrayView2<'_, T>,
    cache: &MomentCache<T>,
    partition: &FoldPartition,
    slopes: &[Array1<T>],
) -> Result<CrossFit<T>> {
    let (n, p) = design.dim();
    check_partition(partition, n)?;
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("{n} design rows but {} responses", y.len())));
    }
    if cache.dim() != p {
        return Err(Error::DimensionMismatch(format!(
            "labeled design has {p} columns but the unlabeled moments have {}",
            cache.dim()
        )));
    }
    if slopes.len() != partition.k() {
        return Err(Error::DimensionMismatch(format!(
            "{} slopes for {} folds",
            slopes.len(),
            partition.k()
        )));
    }
    if let Some((k, b)) = slopes.iter().enumerate().find(|(_, b)| b.len() != p) {
        return Err(Error::DimensionMismatch(format!("slope for fold {k} has length {}, expected {p}", b.len())));
    }
    if let Some(k) = slopes.iter().position(|b| b.iter().any(|v| !v.is_finite())) {
        return Err(Error::invalid("slope has non-finite entries").in_fold(k));
    }

    let folds = partition.folds();
    let mu = cache.mu_hat();
    let mut per_fold_theta = Vec::with_capacity(folds.len());
    let mut proj = Array1::<T>::zeros(n);
    let mut quad = Vec::with_capacity(folds.len());
    for (fold, b) in folds.iter().zip(slopes) {
        let size = T::from_count(fold.len());
        let mut resid_sum = T::zero();
        for &i in fold {
            let row = design.row(i);
            resid_sum += y[i] - row.dot(b);
            proj[i] = row
                .iter()
                .zip(mu.iter())
                .zip(b.iter())
                .map(|((&w, &u), &bj)| bj * (w - u))
                .sum();
        }
        per_fold_theta.push(mu.dot(b) + resid_sum / size);
        quad.push(cache.quad_form(b.view()));
    }
    let theta_hat = per_fold_theta.iter().copied().sum::<T>() / T::from_count(folds.len());
    Ok(CrossFit {
        folds,
        per_fold_theta,
        theta_hat,
        proj,
        quad,
        n,
        m: cache.m(),
    })
}

impl<T: Scalar> CrossFit<T> {
    fn ratio(&self) -> T {
        T::from_count(self.n) / T::from_count(self.m)
    }

    fn k_mean(&self, f: impl Fn(usize, &[usize]) -> T) -> T {
        let total: T = self.folds.iter().enumerate().map(|(k, fold)| f(k, fold)).sum();
        total / T::from_count(self.folds.len())
    }

    pub fn mean_inference(&self, y: ArrayView1<'_, T>, alpha: f64) -> Result<MeanInference<T>> {
        let z = z_value(alpha)?;
        let eps = |i: usize| y[i] - self.theta_hat - self.proj[i];
        let sigma_eps_sq = self.k_mean(|_, fold| {
            fold.iter().map(|&i| eps(i) * eps(i)).sum::<T>() / T::from_count(fold.len())
        });
        let b_sq = self.k_mean(|k, fold| {
            let cross: T = fold.iter().map(|&i| self.proj[i] * eps(i)).sum();
            self.quad[k] + T::lit(2.0) * cross / T::from_count(fold.len())
        });
        let var_hat = sigma_eps_sq + self.ratio() * b_sq.max(T::zero());
        Ok(MeanInference {
            theta_hat: self.theta_hat,
            per_fold: self.per_fold_theta.clone(),
            sigma_eps_sq,
            b_sq,
            var_hat,
            ci: interval(self.theta_hat, var_hat, self.n, z),
            n: self.n,
            m: self.m,
            k: self.folds.len(),
            alpha,
        })
    }

    /// Per-fold variance estimates, their average, and the per-row
    /// influence terms `nu_i` and `xi_i`.
    pub fn variance_parts(&self, y: ArrayView1<'_, T>) -> VarianceParts<T> {
        let mut per_fold = Vec::with_capacity(self.folds.len());
        for (k, fold) in self.folds.iter().enumerate() {
            let size = T::from_count(fold.len());
            let dev: T = fold.iter().map(|&i| (y[i] - self.theta_hat).powi(2)).sum();
            let proj_sq: T = fold.iter().map(|&i| self.proj[i] * self.proj[i]).sum();
            per_fold.push(dev / size + self.quad[k] - proj_sq / size);
        }
        let sigma_sq = per_fold.iter().copied().sum::<T>() / T::from_count(per_fold.len());
        let mut nu = Array1::<T>::zeros(self.n);
        let mut xi = Array1::<T>::zeros(self.n);
        for (k, fold) in self.folds.iter().enumerate() {
            for &i in fold {
                let e = y[i] - self.theta_hat - self.proj[i];
                let eta = e * e + T::lit(2.0) * self.proj[i] * e + self.quad[k];
                nu[i] = eta - sigma_sq;
                xi[i] = self.proj[i] * self.proj[i] - self.quad[k];
            }
        }
        VarianceParts {
            per_fold,
            sigma_sq,
            nu,
            xi,
        }
    }

    pub fn variance_inference(&self, y: ArrayView1<'_, T>, alpha: f64) -> Result<VarianceInference<T>> {
        let z = z_value(alpha)?;
        let parts = self.variance_parts(y);
        let nf = T::from_count(self.n);
        let sigma_nu_sq = parts.nu.dot(&parts.nu) / nf;
        let sigma_xi_sq = parts.xi.dot(&parts.xi) / nf;
        let var_hat = sigma_nu_sq + self.ratio() * sigma_xi_sq;
        Ok(VarianceInference {
            sigma_y_sq_hat: parts.sigma_sq,
            ci: interval(parts.sigma_sq, var_hat, self.n, z),
            per_fold: parts.per_fold,
            sigma_xi_sq,
            sigma_nu_sq,
            var_hat,
            n: self.n,
            m: self.m,
            k: self.folds.len(),
            alpha,
        })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct VarianceParts<T> {
    pub per_fold: Vec<T>,
    pub sigma_sq: T,
    pub nu: Array1<T>,
    pub xi: Array1<T>,
}

/// Fits the learner on the complement of every fold, in parallel. Results
/// are in fold order; a failure is reported for the lowest failing fold.
pub fn fit_fold_slopes<T: Scalar, L: SlopeLearner<T> + ?Sized>(
    covariates: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    partition: &FoldPartition,
    learner: &L,
) -> Result<Vec<SlopeFit<T>>> {
    check_partition(partition, y.len())?;
    let fits: Vec<Result<SlopeFit<T>>> = (0..partition.k())
        .into_par_iter()
        .map(|k| {
            let rows = partition.complement(k);
            let x = covariates.select(Axis(0), &rows);
            let yc = y.select(Axis(0), &rows);
            learner.fit(x.view(), yc.view()).map_err(|e| e.in_fold(k))
        })
        .collect();
    fits.into_iter().collect()
}

fn coefficients<T: Scalar>(fits: Vec<SlopeFit<T>>) -> Vec<Array1<T>> {
    fits.into_iter().map(|f| f.coefficients).collect()
}

fn check_columns<T: Scalar>(labeled: &LabeledSet<T>, cache: &MomentCache<T>) -> Result<()> {
    if labeled.n_covariates() + 1 != cache.dim() {
        return Err(Error::DimensionMismatch(format!(
            "labeled set has {} covariates but the unlabeled moments are for {}",
            labeled.n_covariates(),
            cache.dim() - 1
        )));
    }
    Ok(())
}

/// Mean estimate from given fold slopes (intercept first, length `p`).
pub fn mean_from_slopes<T: Scalar>(
    labeled: &LabeledSet<T>,
    cache: &MomentCache<T>,
    partition: &FoldPartition,
    slopes: &[Array1<T>],
    alpha: f64,
) -> Result<MeanInference<T>> {
    check_columns(labeled, cache)?;
    let cf = cross_fit(labeled.responses(), labeled.design().view(), cache, partition, slopes)?;
    cf.mean_inference(labeled.responses(), alpha)
}

/// Variance estimate from given fold slopes. The centering `theta_hat` is
/// recomputed from the same slopes.
pub fn variance_from_slopes<T: Scalar>(
    labeled: &LabeledSet<T>,
    cache: &MomentCache<T>,
    partition: &FoldPartition,
    slopes: &[Array1<T>],
    alpha: f64,
) -> Result<VarianceInference<T>> {
    check_columns(labeled, cache)?;
    let cf = cross_fit(labeled.responses(), labeled.design().view(), cache, partition, slopes)?;
    cf.variance_inference(labeled.responses(), alpha)
}

pub fn estimate_mean<T: Scalar, L: SlopeLearner<T> + ?Sized>(
    labeled: &LabeledSet<T>,
    cache: &MomentCache<T>,
    partition: &FoldPartition,
    learner: &L,
    alpha: f64,
) -> Result<MeanInference<T>> {
    Ok(estimate_mean_variance(labeled, cache, partition, learner, alpha)?.0)
}

/// Variance estimate centered at `mean`, which must come from the same
/// partition and learner.
pub fn estimate_variance<T: Scalar, L: SlopeLearner<T> + ?Sized>(
    labeled: &LabeledSet<T>,
    cache: &MomentCache<T>,
    partition: &FoldPartition,
    learner: &L,
    mean: &MeanInference<T>,
    alpha: f64,
) -> Result<VarianceInference<T>> {
    check_columns(labeled, cache)?;
    let slopes = coefficients(fit_fold_slopes(labeled.covariates(), labeled.responses(), partition, learner)?);
    let mut cf = cross_fit(labeled.responses(), labeled.design().view(), cache, partition, &slopes)?;
    if mean.k != partition.k() || mean.n != labeled.n() {
        return Err(Error::invalid("mean inference comes from a different partition"));
    }
    cf.theta_hat = mean.theta_hat;
    cf.variance_inference(labeled.responses(), alpha)
}

/// Mean and variance from one set of fold fits.
pub fn estimate_mean_variance<T: Scalar, L: SlopeLearner<T> + ?Sized>(
    labeled: &LabeledSet<T>,
    cache: &MomentCache<T>,
    partition: &FoldPartition,
    learner: &L,
    alpha: f64,
) -> Result<(MeanInference<T>, VarianceInference<T>)> {
    check_columns(labeled, cache)?;
    let slopes = coefficients(fit_fold_slopes(labeled.covariates(), labeled.responses(), partition, learner)?);
    let cf = cross_fit(labeled.responses(), labeled.design().view(), cache, partition, &slopes)?;
    Ok((
        cf.mean_inference(labeled.responses(), alpha)?,
        cf.variance_inference(labeled.responses(), alpha)?,
    ))
}

/// Combines mean estimates from several partitions of the same data:
/// `theta_bar` is their average and `var_bar` adds the between-partition
/// spread to the average within-partition variance.
pub fn mean_over_partitions<T: Scalar>(
    runs: &[MeanInference<T>],
    seeds: Vec<u64>,
    alpha: f64,
) -> Result<MultiPartitionInference<T>> {
    let z = z_value(alpha)?;
    let Some(first) = runs.first() else {
        return Err(Error::invalid("need at least one partition"));
    };
    let t = T::from_count(runs.len());
    let estimates: Vec<T> = runs.iter().map(|r| r.theta_hat).collect();
    let variances: Vec<T> = runs.iter().map(|r| r.var_hat).collect();
    let theta_bar = estimates.iter().copied().sum::<T>() / t;
    let within = variances.iter().copied().sum::<T>() / t;
    let between = estimates.iter().map(|&e| (e - theta_bar).powi(2)).sum::<T>() / t;
    let var_bar = within + between;
    Ok(MultiPartitionInference {
        theta_bar,
        var_bar,
        ci: interval(theta_bar, var_bar, first.n, z),
        estimates,
        variances,
        seeds,
        n: first.n,
        alpha,
    })
}

/// Runs the mean estimator on `t` random `k`-fold partitions. Partition `j`
/// is drawn with seed `seed + j` (wrapping), so `t = 1` reproduces
/// [`estimate_mean`] on `make_partition(n, k, seed)`.
pub fn estimate_mean_multi<T: Scalar, L: SlopeLearner<T> + ?Sized>(
    labeled: &LabeledSet<T>,
    cache: &MomentCache<T>,
    t: usize,
    k: usize,
    learner: &L,
    alpha: f64,
    seed: u64,
) -> Result<MultiPartitionInference<T>> {
    if t == 0 {
        return Err(Error::invalid("number of partitions must be at least 1"));
    }
    let seeds: Vec<u64> = (0..t as u64).map(|j| seed.wrapping_add(j)).collect();
    let runs = seeds
        .iter()
        .map(|&s| {
            let partition = make_partition(labeled.n(), k, s)?;
            estimate_mean(labeled, cache, &partition, learner, alpha)
        })
        .collect::<Result<Vec<_>>>()?;
    mean_over_partitions(&runs, seeds, alpha)
}

fn mean_and_spread<T: Scalar>(y: ArrayView1<'_, T>) -> Result<(T, T)> {
    if y.is_empty() {
        return Err(Error::invalid("no responses"));
    }
    let n = T::from_count(y.len());
    let mean = y.sum() / n;
    let s2 = y.iter().map(|&v| (v - mean).powi(2)).sum::<T>() / n;
    Ok((mean, s2))
}

/// Label-only interval `Ybar -/+ z S / sqrt(n)`, with `S^2` the mean squared
/// deviation.
pub fn sample_mean_ci<T: Scalar>(y: ArrayView1<'_, T>, alpha: f64) -> Result<Inference<T>> {
    let z = z_value(alpha)?;
    let (mean, s2) = mean_and_spread(y)?;
    Ok(Inference {
        estimate: mean,
        ci: interval(mean, s2, y.len(), z),
        n: y.len(),
        alpha,
    })
}

/// Sample kurtosis `gamma` (equal to 3 for Gaussian data), built on the
/// mean squared deviation.
pub fn sample_kurtosis<T: Scalar>(y: ArrayView1<'_, T>) -> Result<T> {
    let n = y.len();
    if n < 4 {
        return Err(Error::invalid(format!("kurtosis needs at least 4 responses, got {n}")));
    }
    let (mean, s2) = mean_and_spread(y)?;
    if s2 <= T::zero() {
        return Err(Error::Undefined("kurtosis of a constant response".into()));
    }
    let nf = T::from_count(n);
    let one = T::one();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let m4: T = y.iter().map(|&v| (v - mean).powi(4)).sum();
    let lead = nf * (nf + one) / ((nf - one) * (nf - two) * (nf - three));
    let tail = three * (nf - one).powi(2) / ((nf - two) * (nf - three));
    Ok(lead * m4 / (s2 * s2) - tail + three)
}

/// Label-only interval for the variance,
/// `[S^2 / (1 + z c), S^2 / (1 - z c)]` with `c = sqrt((gamma - 1) / n)`.
/// The upper end is `+inf` when `z c >= 1`.
pub fn sample_variance_ci<T: Scalar>(y: ArrayView1<'_, T>, alpha: f64) -> Result<Inference<T>> {
    let z = T::lit(z_value(alpha)?);
    let gamma = sample_kurtosis(y)?;
    let (_, s2) = mean_and_spread(y)?;
    let n = y.len();
    let c = (gamma - T::one()).max(T::zero()).sqrt() / T::from_count(n).sqrt();
    let lo = s2 / (T::one() + z * c);
    let denom = T::one() - z * c;
    let hi = if denom > T::zero() { s2 / denom } else { T::infinity() };
    Ok(Inference {
        estimate: s2,
        ci: (lo, hi),
        n,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nuisance::LearnerSpec;
    use ndarray::array;

    #[test]
    fn z_matches_tables() {
        assert!((z_value(0.05).unwrap() - 1.959963984540054).abs() < 1e-9);
        assert!((z_value(0.10).unwrap() - 1.6448536269514722).abs() < 1e-9);
        assert!(z_value(0.0).is_err());
        assert!(z_value(1.0).is_err());
    }

    #[test]
    fn two_row_cache() {
        let u = UnlabeledSet::new(array![[0.0], [2.0]]).unwrap();
        let c = moment_cache(&u).unwrap();
        assert_eq!(c.mu_hat().to_vec(), vec![1.0, 1.0]);
        assert_eq!(c.c_hat()[[1, 1]], 1.0);
        assert_eq!(c.c_hat()[[0, 0]], 0.0);
        assert_eq!(c.c_hat()[[0, 1]], 0.0);
    }

    #[test]
    fn zero_learner_on_four_points() {
        let l = LabeledSet::new(array![1.0, 2.0, 3.0, 4.0], array![[0.3], [0.1], [0.7], [0.2]]).unwrap();
        let u = UnlabeledSet::new(array![[5.0], [1.0], [2.0]]).unwrap();
        let cache = moment_cache(&u).unwrap();
        let part = FoldPartition::from_assignment(2, vec![0, 0, 1, 1]).unwrap();
        let (mean, var) = estimate_mean_variance(&l, &cache, &part, &LearnerSpec::zero(), 0.05).unwrap();
        assert_eq!(mean.per_fold, vec![1.5, 3.5]);
        assert_eq!(mean.theta_hat, 2.5);
        assert_eq!(mean.b_sq, 0.0);
        assert_eq!(mean.sigma_eps_sq, 1.25);
        assert_eq!(var.sigma_y_sq_hat, 1.25);
        assert_eq!(var.sigma_xi_sq, 0.0);
    }

    #[test]
    fn constant_response_has_zero_width() {
        let l = LabeledSet::new(array![2.0, 2.0, 2.0, 2.0], array![[0.3], [0.1], [0.7], [0.2]]).unwrap();
        let u = UnlabeledSet::new(array![[5.0], [1.0]]).unwrap();
        let cache = moment_cache(&u).unwrap();
        let part = make_partition(4, 2, 3).unwrap();
        let mean = estimate_mean(&l, &cache, &part, &LearnerSpec::zero(), 0.05).unwrap();
        assert_eq!(mean.theta_hat, 2.0);
        assert_eq!(mean.sigma_eps_sq, 0.0);
        assert_eq!(mean.ci, (2.0, 2.0));
    }

    #[test]
    fn baselines_on_four_points() {
        let y = array![1.0, 2.0, 3.0, 4.0];
        let m = sample_mean_ci(y.view(), 0.05).unwrap();
        assert_eq!(m.estimate, 2.5);
        let v = sample_variance_ci(y.view(), 0.05).unwrap();
        assert_eq!(v.estimate, 1.25);
        assert!(v.ci.0 <= v.estimate && v.estimate <= v.ci.1);
        assert!(sample_variance_ci(array![1.0, 1.0, 1.0, 1.0].view(), 0.05).is_err());
        assert!(sample_variance_ci(array![1.0, 2.0, 3.0].view(), 0.05).is_err());
    }

    #[test]
    fn slope_count_must_match_folds() {
        let l = LabeledSet::new(array![1.0, 2.0, 3.0, 4.0], array![[0.3], [0.1], [0.7], [0.2]]).unwrap();
        let u = UnlabeledSet::new(array![[5.0], [1.0]]).unwrap();
        let cache = moment_cache(&u).unwrap();
        let part = make_partition(4, 2, 3).unwrap();
        let slopes = vec![Array1::zeros(2)];
        assert!(mean_from_slopes(&l, &cache, &part, &slopes, 0.05).is_err());
    }
}
