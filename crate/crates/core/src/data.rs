//! Datasets, fold partitions and run configuration.
//!
//! Covariates are stored raw (`p - 1` columns). Estimators work with the
//! augmented design `X̃ = (1, X)`, built by [`augment`].

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nuisance::LearnerSpec;
use crate::scalar::Scalar;

fn check_finite<T: Scalar>(m: ArrayView2<'_, T>) -> Result<()> {
    for ((row, col), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(())
}

/// Labeled sample: responses with their raw covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSet<T> {
    responses: Array1<T>,
    covariates: Array2<T>,
}

impl<T: Scalar> LabeledSet<T> {
    pub fn new(responses: Array1<T>, covariates: Array2<T>) -> Result<Self> {
        if responses.len() != covariates.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} responses but {} covariate rows",
                responses.len(),
                covariates.nrows()
            )));
        }
        if responses.is_empty() {
            return Err(Error::invalid("labeled set is empty"));
        }
        if let Some(row) = responses.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row, col: 0 });
        }
        check_finite(covariates.view())?;
        Ok(Self {
            responses,
            covariates,
        })
    }

    pub fn n(&self) -> usize {
        self.responses.len()
    }

    /// Number of raw covariates, `p - 1`.
    pub fn n_covariates(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn responses(&self) -> ArrayView1<'_, T> {
        self.responses.view()
    }

    pub fn covariates(&self) -> ArrayView2<'_, T> {
        self.covariates.view()
    }

    /// Augmented design `n × p` with a leading column of ones.
    pub fn design(&self) -> Array2<T> {
        augment(self.covariates.view())
    }

    /// Rows restricted to `rows`, in the given order.
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            responses: self.responses.select(Axis(0), rows),
            covariates: self.covariates.select(Axis(0), rows),
        }
    }
}

/// Unlabeled sample: covariates only.
#[derive(Debug, Clone, PartialEq)]
pub struct UnlabeledSet<T> {
    covariates: Array2<T>,
}

impl<T: Scalar> UnlabeledSet<T> {
    pub fn new(covariates: Array2<T>) -> Result<Self> {
        if covariates.nrows() == 0 {
            return Err(Error::invalid("unlabeled set is empty"));
        }
        check_finite(covariates.view())?;
        Ok(Self { covariates })
    }

    pub fn m(&self) -> usize {
        self.covariates.nrows()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.ncols()
    }

    pub fn covariates(&self) -> ArrayView2<'_, T> {
        self.covariates.view()
    }

    pub fn design(&self) -> Array2<T> {
        augment(self.covariates.view())
    }
}

/// Prepends a column of ones: `r × (p-1)` becomes `r × p`.
pub fn augment<T: Scalar>(covariates: ArrayView2<'_, T>) -> Array2<T> {
    let (rows, cols) = covariates.dim();
    let mut out = Array2::<T>::ones((rows, cols + 1));
    out.slice_mut(s![.., 1..]).assign(&covariates);
    out
}

/// Assignment of `n` labeled rows to `K` folds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldPartition {
    k: usize,
    assignment: Vec<usize>,
    seed: u64,
}

impl FoldPartition {
    /// Builds a partition from an explicit assignment. Every fold in `0..k`
    /// must receive at least one row.
    pub fn from_assignment(k: usize, assignment: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("K must be positive"));
        }
        let mut counts = vec![0usize; k];
        for &f in &assignment {
            if f >= k {
                return Err(Error::invalid(format!("fold index {f} out of range for K = {k}")));
            }
            counts[f] += 1;
        }
        if let Some(empty) = counts.iter().position(|&c| c == 0) {
            return Err(Error::invalid(format!("fold {empty} is empty")));
        }
        Ok(Self {
            k,
            assignment,
            seed: 0,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Row indices of each fold, ascending within a fold.
    pub fn folds(&self) -> Vec<Vec<usize>> {
        let mut folds = vec![Vec::new(); self.k];
        for (i, &f) in self.assignment.iter().enumerate() {
            folds[f].push(i);
        }
        folds
    }

    /// Row indices outside fold `fold`, ascending.
    pub fn complement(&self, fold: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &f)| f != fold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignment {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Uniformly random, balanced `K`-way split of `0..n`.
///
/// The rows are shuffled with a ChaCha8 stream seeded by `seed` (Fisher-Yates
/// as implemented by `rand`), and the row at shuffled position `i` goes to
/// fold `i mod K`. Fold sizes therefore differ by at most one.
pub fn make_partition(n: usize, k: usize, seed: u64) -> Result<FoldPartition> {
    if k == 0 {
        return Err(Error::invalid("K must be positive"));
    }
    if k > n {
        return Err(Error::invalid(format!("K = {k} exceeds n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut assignment = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        assignment[row] = pos % k;
    }
    Ok(FoldPartition { k, assignment, seed })
}

/// Bounds propensity estimates are clipped to before weighting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct TrimBounds {
    lo: f64,
    hi: f64,
}

impl TrimBounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo < 1.0 && hi > 0.0 && hi < 1.0) {
            return Err(Error::invalid(format!("trim bounds [{lo}, {hi}] must lie in (0, 1)")));
        }
        if lo >= hi {
            return Err(Error::invalid("trim lower >= upper"));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn clip<T: Scalar>(&self, e: T) -> T {
        e.max(T::lit(self.lo)).min(T::lit(self.hi))
    }
}

impl Default for TrimBounds {
    fn default() -> Self {
        Self { lo: 0.01, hi: 0.99 }
    }
}

impl TryFrom<[f64; 2]> for TrimBounds {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Self::new(v[0], v[1])
    }
}

impl From<TrimBounds> for [f64; 2] {
    fn from(t: TrimBounds) -> Self {
        [t.lo, t.hi]
    }
}

/// Settings shared by one estimation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub k: usize,
    pub t_partitions: usize,
    pub alpha: f64,
    pub seed: u64,
    pub learner: LearnerSpec<f64>,
    pub trim: TrimBounds,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            k: 2,
            t_partitions: 1,
            alpha: 0.05,
            seed: 0,
            learner: LearnerSpec::default(),
            trim: TrimBounds::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::invalid(format!("k: {} folds, need at least 2", self.k)));
        }
        if self.t_partitions == 0 {
            return Err(Error::invalid("t_partitions: must be positive"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha: {} not in (0, 1)", self.alpha)));
        }
        self.learner
            .validate()
            .map_err(|e| Error::invalid(format!("learner: {e}")))?;
        TrimBounds::new(self.trim.lo, self.trim.hi).map(|_| ())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn augment_prepends_ones() {
        assert_eq!(augment(array![[2.0, 3.0]].view()), array![[1.0, 2.0, 3.0]]);
        assert_eq!(augment(array![[0.0, 0.0]].view()), array![[1.0, 0.0, 0.0]]);
        let empty = Array2::<f64>::zeros((0, 2));
        assert_eq!(augment(empty.view()).dim(), (0, 3));
    }

    #[test]
    fn partition_examples() {
        let p = make_partition(4, 2, 7).unwrap();
        assert_eq!(p.sizes(), vec![2, 2]);
        let mut sizes = make_partition(5, 2, 1).unwrap().sizes();
        sizes.sort();
        assert_eq!(sizes, vec![2, 3]);
        let loo = make_partition(48, 48, 0).unwrap();
        assert!(loo.sizes().iter().all(|&s| s == 1));
    }

    #[test]
    fn partition_errors() {
        assert!(make_partition(3, 4, 0).is_err());
        assert!(make_partition(3, 0, 0).is_err());
        assert!(FoldPartition::from_assignment(3, vec![0, 1, 1]).is_err());
        assert!(FoldPartition::from_assignment(2, vec![0, 2]).is_err());
    }

    #[test]
    fn partition_is_reproducible() {
        let a = make_partition(101, 7, 42).unwrap();
        let b = make_partition(101, 7, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.assignment(), make_partition(101, 7, 43).unwrap().assignment());
    }

    #[test]
    fn labeled_set_rejects_bad_input() {
        assert!(LabeledSet::new(array![1.0, 2.0], array![[1.0]]).is_err());
        let err = LabeledSet::new(array![1.0], array![[f64::NAN, 0.0]]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { row: 0, col: 0 }));
        assert!(UnlabeledSet::new(Array2::<f64>::zeros((0, 3))).is_err());
    }

    #[test]
    fn trim_bounds_validation() {
        assert!(TrimBounds::new(0.2, 0.1).is_err());
        assert!(TrimBounds::new(0.0, 0.5).is_err());
        let t = TrimBounds::default();
        assert_eq!(t.clip(1.0), 0.99);
        assert_eq!(t.clip(0.0f32), 0.01f32);
    }
}
