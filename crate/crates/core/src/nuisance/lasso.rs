//! Lasso, square-root lasso and cross-validated lasso with an unpenalized
//! intercept.
//!
//! The penalty acts on raw-scale slopes. Internally the covariates are
//! standardized and the penalty is rescaled per coordinate, so the solution
//! is that of the raw objective
//!
//! ```text
//! (2r)^-1 ||y - b0 - X b||^2 + lambda ||b||_1
//! ```

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use super::cd::{coordinate_descent, CdOutcome};
use super::standardize::{standardize_response, Standardized};
use super::{check_shapes, fit_zero, LearnerSpec, SlopeFit, Variant, CV_GRID_LEN};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Smallest penalty at which every slope is zero: `max_j |x_j^T (y - ybar)| / r`
/// with centered columns.
pub fn lasso_lambda_max<T: Scalar>(x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> T {
    let r = T::from_count(y.len());
    let y_mean = y.sum() / r;
    let x_mean = x.sum_axis(Axis(0)).mapv(|s| s / r);
    let mut best = T::zero();
    for (j, col) in x.axis_iter(Axis(1)).enumerate() {
        let g: T = col
            .iter()
            .zip(y.iter())
            .map(|(&xij, &yi)| (xij - x_mean[j]) * (yi - y_mean))
            .sum();
        best = best.max((g / r).abs());
    }
    best
}

/// `len` log-spaced values from `lambda_max` down to `lambda_max * ratio`.
pub fn lambda_grid<T: Scalar>(lambda_max: T, ratio: f64, len: usize) -> Vec<T> {
    if len == 1 {
        return vec![lambda_max];
    }
    let step = ratio.ln() / (len - 1) as f64;
    (0..len)
        .map(|i| lambda_max * T::lit((step * i as f64).exp()))
        .collect()
}

struct Problem<T> {
    std: Standardized<T>,
    y: Array1<T>,
    y_mean: T,
    y_scale: T,
}

impl<T: Scalar> Problem<T> {
    fn new(x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> Self {
        let (y, y_mean, y_scale) = standardize_response(y);
        Self {
            std: Standardized::new(x),
            y,
            y_mean,
            y_scale,
        }
    }

    /// Per-coordinate penalties in standardized units for raw penalty `lambda`.
    fn penalties(&self, lambda: T) -> Vec<T> {
        self.std
            .x_scale
            .iter()
            .map(|&s| {
                if s > T::zero() {
                    lambda / (self.y_scale * s)
                } else {
                    T::zero()
                }
            })
            .collect()
    }

    fn raw(&self, gamma: &Array1<T>) -> Array1<T> {
        self.std.to_raw(gamma.view(), self.y_mean, self.y_scale)
    }

    fn intercept_only(&self) -> Array1<T> {
        let mut c = Array1::zeros(self.std.q() + 1);
        c[0] = self.y_mean;
        c
    }
}

fn check_lambda<T: Scalar>(lambda: T) -> Result<()> {
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::invalid(format!("lambda {lambda} must be a nonnegative number")));
    }
    Ok(())
}

/// Coordinate-descent lasso at a fixed penalty.
pub fn fit_lasso<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    lambda: T,
    spec: &LearnerSpec<T>,
) -> Result<SlopeFit<T>> {
    fit_lasso_impl(x, y, lambda, spec, None)
}

/// [`fit_lasso`] that also records the standardized objective after every
/// sweep. Used to check monotone descent.
pub fn fit_lasso_traced<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    lambda: T,
    spec: &LearnerSpec<T>,
) -> Result<(SlopeFit<T>, Vec<T>)> {
    let mut trace = Vec::new();
    let fit = fit_lasso_impl(x, y, lambda, spec, Some(&mut trace))?;
    Ok((fit, trace))
}

fn fit_lasso_impl<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    lambda: T,
    spec: &LearnerSpec<T>,
    trace: Option<&mut Vec<T>>,
) -> Result<SlopeFit<T>> {
    check_shapes(x, y)?;
    check_lambda(lambda)?;
    let prob = Problem::new(x, y);
    if prob.y_scale == T::zero() {
        return Ok(SlopeFit {
            coefficients: prob.intercept_only(),
            solver: Variant::Lasso,
            lambda,
            iterations: 0,
            converged: true,
        });
    }
    let pen = prob.penalties(lambda);
    let mut gamma = Array1::zeros(prob.std.q());
    let mut resid = prob.y.clone();
    let out = coordinate_descent(
        prob.std.xt.view(),
        &prob.std.live(),
        &pen,
        &mut gamma,
        &mut resid,
        spec.tolerance,
        spec.max_iters,
        trace,
    );
    Ok(SlopeFit {
        coefficients: prob.raw(&gamma),
        solver: Variant::Lasso,
        lambda,
        iterations: out.sweeps,
        converged: out.converged,
    })
}

/// Square-root lasso: minimizes `||y - b0 - X b||_2 / sqrt(r) + lambda ||b||_1`.
///
/// Solved by the scaled-lasso iteration: alternate the noise level
/// `sigma = ||resid|| / sqrt(r)` with a lasso at penalty `lambda * sigma`
/// until `sigma` moves by less than `1e-8` (in units of the response's
/// standard deviation). If the residual vanishes the current interpolating
/// lasso fit is returned.
pub fn fit_sqrt_lasso<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    lambda: T,
    spec: &LearnerSpec<T>,
) -> Result<SlopeFit<T>> {
    const MAX_OUTER: usize = 500;
    check_shapes(x, y)?;
    check_lambda(lambda)?;
    let prob = Problem::new(x, y);
    if prob.y_scale == T::zero() {
        return Ok(SlopeFit {
            coefficients: prob.intercept_only(),
            solver: Variant::SqrtLasso,
            lambda,
            iterations: 0,
            converged: true,
        });
    }
    let r = T::from_count(prob.std.r());
    let live = prob.std.live();
    // the standardized response has unit norm per row, so sigma starts at 1
    let base: Vec<T> = prob
        .std
        .x_scale
        .iter()
        .map(|&s| if s > T::zero() { lambda / s } else { T::zero() })
        .collect();
    let sigma_tol = T::lit(1e-8).max(T::epsilon() * T::lit(64.0));
    let mut sigma = T::one();
    let mut gamma = Array1::zeros(prob.std.q());
    let mut resid = prob.y.clone();
    let mut sweeps = 0;
    let mut converged = false;
    for _ in 0..MAX_OUTER {
        let pen: Vec<T> = base.iter().map(|&w| w * sigma).collect();
        let CdOutcome {
            sweeps: s,
            converged: inner_ok,
        } = coordinate_descent(
            prob.std.xt.view(),
            &live,
            &pen,
            &mut gamma,
            &mut resid,
            spec.tolerance,
            spec.max_iters,
            None,
        );
        sweeps += s;
        let next = (resid.dot(&resid) / r).sqrt();
        if next <= T::epsilon() {
            converged = inner_ok;
            break;
        }
        let moved = (next - sigma).abs();
        sigma = next;
        if moved < sigma_tol {
            converged = inner_ok;
            break;
        }
    }
    Ok(SlopeFit {
        coefficients: prob.raw(&gamma),
        solver: Variant::SqrtLasso,
        lambda,
        iterations: sweeps,
        converged,
    })
}

/// Fraction of response variance explained past which a path stops early.
const PATH_MAX_R2: f64 = 0.999;
/// Relative gain in explained variance below which a path stops early.
const PATH_MIN_GAIN: f64 = 1e-5;
/// Path points always computed before the early-exit checks apply.
const PATH_MIN_POINTS: usize = 5;
/// Coordinate tolerance for the paths that only score penalties during
/// cross-validation. The selected fit is then polished at the spec tolerance.
const CV_SCREEN_TOL: f64 = 1e-4;

struct Path<T> {
    gammas: Vec<Array1<T>>,
    sweeps: Vec<usize>,
}

/// Warm-started lasso path over `lambdas` (descending). Stops early, like
/// glmnet, once the fit explains nearly all of the response variance or the
/// explained fraction stops growing, so the result may be shorter than
/// `lambdas`.
fn lasso_path<T: Scalar>(prob: &Problem<T>, lambdas: &[T], tol: T, max_sweeps: usize) -> Path<T> {
    let live = prob.std.live();
    let r = T::from_count(prob.std.r());
    let mut gamma = Array1::zeros(prob.std.q());
    let mut resid = prob.y.clone();
    let mut path = Path {
        gammas: Vec::with_capacity(lambdas.len()),
        sweeps: Vec::with_capacity(lambdas.len()),
    };
    let mut last_r2 = T::zero();
    for &lambda in lambdas {
        if prob.y_scale == T::zero() {
            path.gammas.push(gamma.clone());
            path.sweeps.push(0);
            continue;
        }
        let out = coordinate_descent(
            prob.std.xt.view(),
            &live,
            &prob.penalties(lambda),
            &mut gamma,
            &mut resid,
            tol,
            max_sweeps,
            None,
        );
        path.gammas.push(gamma.clone());
        path.sweeps.push(out.sweeps);
        // the standardized response has total sum of squares r
        let r2 = T::one() - resid.dot(&resid) / r;
        if path.gammas.len() >= PATH_MIN_POINTS
            && (r2 > T::lit(PATH_MAX_R2) || r2 - last_r2 < T::lit(PATH_MIN_GAIN) * r2)
        {
            break;
        }
        last_r2 = r2;
    }
    path
}

/// Lasso with the penalty chosen by `cv_folds`-fold cross-validation.
///
/// The grid has [`CV_GRID_LEN`] log-spaced points from the kill threshold
/// [`lasso_lambda_max`] down to `1e-3` times it, truncated where the
/// full-data path stops early. Row `i` is held out in fold `i mod cv_folds`.
/// The penalty with the smallest pooled out-of-fold squared error wins, ties
/// going to the smaller penalty. Penalties are scored with paths solved to a
/// coarse tolerance; the winning full-data fit is then refined to
/// `spec.tolerance`.
pub fn fit_lasso_cv<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    spec: &LearnerSpec<T>,
) -> Result<SlopeFit<T>> {
    check_shapes(x, y)?;
    let (r, q) = x.dim();
    let folds = spec.cv_folds;
    if folds < 2 {
        return Err(Error::invalid("cv_folds must be at least 2"));
    }
    if r < folds {
        return Err(Error::invalid(format!(
            "{r} rows is fewer than cv_folds = {folds}"
        )));
    }
    let lambda_max = lasso_lambda_max(x, y);
    if lambda_max <= T::zero() {
        let mut fit = fit_zero(q);
        fit.coefficients[0] = y.sum() / T::from_count(r);
        fit.solver = Variant::Lasso;
        return Ok(fit);
    }
    let prob = Problem::new(x, y);
    let mut grid = lambda_grid(lambda_max, 1e-3, CV_GRID_LEN);
    let screen_tol = spec.tolerance.max(T::lit(CV_SCREEN_TOL));
    let full = lasso_path(&prob, &grid, screen_tol, spec.max_iters);
    grid.truncate(full.gammas.len());

    let fold_sse: Vec<Vec<T>> = (0..folds)
        .into_par_iter()
        .map(|f| {
            let train: Vec<usize> = (0..r).filter(|i| i % folds != f).collect();
            let test: Vec<usize> = (0..r).filter(|i| i % folds == f).collect();
            let xtr = x.select(Axis(0), &train);
            let ytr = y.select(Axis(0), &train);
            let sub = Problem::new(xtr.view(), ytr.view());
            let path = lasso_path(&sub, &grid, screen_tol, spec.max_iters);
            let mut sse = vec![T::zero(); grid.len()];
            let mut coef = sub.raw(&path.gammas[0]);
            for (l, v) in sse.iter_mut().enumerate() {
                // past an early exit the path is frozen at its last fit
                if let Some(g) = path.gammas.get(l) {
                    coef = sub.raw(g);
                }
                let slopes = coef.slice(ndarray::s![1..]);
                for &i in &test {
                    let e = y[i] - coef[0] - x.row(i).dot(&slopes);
                    *v += e * e;
                }
            }
            sse
        })
        .collect();
    let mut sse = vec![T::zero(); grid.len()];
    for fold in &fold_sse {
        for (acc, &v) in sse.iter_mut().zip(fold) {
            *acc += v;
        }
    }
    let mut best = 0;
    for l in 1..grid.len() {
        if sse[l] <= sse[best] {
            best = l;
        }
    }
    let mut gamma = full.gammas[best].clone();
    let mut resid = &prob.y - &prob.std.xt.t().dot(&gamma);
    let polish = coordinate_descent(
        prob.std.xt.view(),
        &prob.std.live(),
        &prob.penalties(grid[best]),
        &mut gamma,
        &mut resid,
        spec.tolerance,
        spec.max_iters,
        None,
    );
    Ok(SlopeFit {
        coefficients: prob.raw(&gamma),
        solver: Variant::Lasso,
        lambda: grid[best],
        iterations: full.sweeps[..=best].iter().sum::<usize>() + polish.sweeps,
        converged: polish.converged,
    })
}
