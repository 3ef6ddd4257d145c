//! Regularized regression and classification solvers used as nuisance fits.
//!
//! Every slope solver returns coefficients on the augmented scale: index 0 is
//! the (never penalized) intercept, indices `1..p` multiply the raw covariates.

mod cd;
mod linalg;
mod logistic;
mod lasso;
mod ridge;
mod standardize;

use std::fmt;

use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::data::TrimBounds;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use lasso::{fit_lasso, fit_lasso_cv, fit_sqrt_lasso, lambda_grid, lasso_lambda_max};
pub use logistic::{fit_logistic_lasso, PropensityFit};
pub use ridge::{fit_ols, fit_ridge};

#[doc(hidden)]
pub use lasso::fit_lasso_traced;

/// Number of grid points used by the cross-validated solvers.
pub const CV_GRID_LEN: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Lasso,
    SqrtLasso,
    Ridge,
    Ols,
    Zero,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Lasso => "lasso",
            Variant::SqrtLasso => "sqrt_lasso",
            Variant::Ridge => "ridge",
            Variant::Ols => "ols",
            Variant::Zero => "zero",
        };
        f.write_str(s)
    }
}

/// How the penalty level is chosen.
///
/// In configuration files this is a number, `"cv"` or `"auto"`. `Auto`
/// resolves to `sqrt(ln p / r)` for a fit on `r` rows and `p` augmented
/// columns; for the logistic solver it means cross-validation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Penalty<T> {
    Fixed(T),
    CrossValidated,
    Auto,
}

impl<T: Scalar> Penalty<T> {
    pub fn auto_level(rows: usize, p: usize) -> T {
        T::lit(((p as f64).ln() / rows as f64).sqrt())
    }
}

impl<T: Serialize> Serialize for Penalty<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Penalty::Fixed(v) => v.serialize(s),
            Penalty::CrossValidated => s.serialize_str("cv"),
            Penalty::Auto => s.serialize_str("auto"),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Penalty<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<T> {
            Num(T),
            Word(String),
        }
        match Raw::<T>::deserialize(d)? {
            Raw::Num(v) => Ok(Penalty::Fixed(v)),
            Raw::Word(w) if w == "cv" => Ok(Penalty::CrossValidated),
            Raw::Word(w) if w == "auto" => Ok(Penalty::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "lambda must be a number, \"cv\" or \"auto\", got {w:?}"
            ))),
        }
    }
}

/// Which solver to run and its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    default,
    bound(
        serialize = "T: Serialize",
        deserialize = "T: Deserialize<'de> + Scalar"
    )
)]
pub struct LearnerSpec<T> {
    pub variant: Variant,
    pub lambda: Penalty<T>,
    pub cv_folds: usize,
    pub tolerance: T,
    pub max_iters: usize,
}

impl<T: Scalar> Default for LearnerSpec<T> {
    fn default() -> Self {
        Self {
            variant: Variant::SqrtLasso,
            lambda: Penalty::Auto,
            cv_folds: 10,
            tolerance: T::lit(1e-7).max(T::epsilon() * T::lit(100.0)),
            max_iters: 10_000,
        }
    }
}

impl<T: Scalar> LearnerSpec<T> {
    pub fn new(variant: Variant, lambda: Penalty<T>) -> Self {
        Self {
            variant,
            lambda,
            ..Self::default()
        }
    }

    pub fn zero() -> Self {
        Self::new(Variant::Zero, Penalty::Fixed(T::zero()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > T::zero()) {
            return Err(Error::invalid("tolerance must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if self.cv_folds < 2 {
            return Err(Error::invalid("cv_folds must be at least 2"));
        }
        if let Penalty::Fixed(l) = self.lambda {
            if !(l >= T::zero()) || !l.is_finite() {
                return Err(Error::invalid(format!("lambda {l} must be a nonnegative number")));
            }
        }
        if self.lambda == Penalty::CrossValidated && self.variant != Variant::Lasso {
            return Err(Error::invalid(format!(
                "cross-validated lambda is only supported for lasso, not {}",
                self.variant
            )));
        }
        Ok(())
    }

    fn resolve(&self, rows: usize, cols: usize) -> T {
        match self.lambda {
            Penalty::Fixed(l) => l,
            _ => Penalty::<T>::auto_level(rows, cols + 1),
        }
    }
}

/// Coefficients from one nuisance regression plus solver bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit<T> {
    /// Length `p`, intercept first.
    pub coefficients: Array1<T>,
    pub solver: Variant,
    pub lambda: T,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Scalar> SlopeFit<T> {
    pub fn predict(&self, x: ArrayView1<'_, T>) -> T {
        self.coefficients[0] + self.coefficients.slice(ndarray::s![1..]).dot(&x)
    }
}

/// Anything that can produce a slope fit from a training block.
pub trait SlopeLearner<T: Scalar>: Sync {
    fn fit(&self, x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> Result<SlopeFit<T>>;
}

impl<T: Scalar> SlopeLearner<T> for LearnerSpec<T> {
    fn fit(&self, x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> Result<SlopeFit<T>> {
        self.validate()?;
        check_shapes(x, y)?;
        let (r, q) = x.dim();
        match self.variant {
            Variant::Zero => Ok(fit_zero(q)),
            Variant::Lasso => match self.lambda {
                Penalty::CrossValidated => fit_lasso_cv(x, y, self),
                _ => fit_lasso(x, y, self.resolve(r, q), self),
            },
            Variant::SqrtLasso => fit_sqrt_lasso(x, y, self.resolve(r, q), self),
            Variant::Ridge => fit_ridge(x, y, self.resolve(r, q)),
            Variant::Ols => fit_ols(x, y),
        }
    }
}

/// The all-zero coefficient vector, including the intercept.
pub fn fit_zero<T: Scalar>(n_covariates: usize) -> SlopeFit<T> {
    SlopeFit {
        coefficients: Array1::zeros(n_covariates + 1),
        solver: Variant::Zero,
        lambda: T::zero(),
        iterations: 0,
        converged: true,
    }
}

pub(crate) fn check_shapes<T: Scalar>(x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} design rows but {} responses",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() == 0 {
        return Err(Error::invalid("cannot fit on zero rows"));
    }
    Ok(())
}

/// A fitted treatment-probability model.
pub trait PropensityModel<T: Scalar>: Send + Sync {
    fn predict(&self, x: ArrayView1<'_, T>) -> T;
}

/// Fits a propensity model from covariates and binary treatments.
pub trait PropensityLearner<T: Scalar>: Sync {
    fn fit(&self, x: ArrayView2<'_, T>, d: &[bool]) -> Result<Box<dyn PropensityModel<T>>>;
}

/// L1-penalized logistic regression clipped to `trim`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticLasso<T> {
    pub spec: LearnerSpec<T>,
    pub trim: TrimBounds,
}

impl<T: Scalar> Default for LogisticLasso<T> {
    fn default() -> Self {
        Self {
            spec: LearnerSpec::new(Variant::Lasso, Penalty::CrossValidated),
            trim: TrimBounds::default(),
        }
    }
}

impl<T: Scalar> PropensityLearner<T> for LogisticLasso<T> {
    fn fit(&self, x: ArrayView2<'_, T>, d: &[bool]) -> Result<Box<dyn PropensityModel<T>>> {
        Ok(Box::new(fit_logistic_lasso(x, d, &self.spec, self.trim)?))
    }
}

/// A known, covariate-free treatment probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantPropensity<T>(pub T);

impl<T: Scalar> PropensityModel<T> for ConstantPropensity<T> {
    fn predict(&self, _x: ArrayView1<'_, T>) -> T {
        self.0
    }
}

impl<T: Scalar> PropensityLearner<T> for ConstantPropensity<T> {
    fn fit(&self, _x: ArrayView2<'_, T>, _d: &[bool]) -> Result<Box<dyn PropensityModel<T>>> {
        Ok(Box::new(*self))
    }
}
