//! Closed-form ridge and ordinary least squares with an unpenalized intercept.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use super::linalg::cholesky_solve;
use super::{check_shapes, SlopeFit, Variant};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Minimizes `(2r)^-1 ||y - b0 - X b||^2 + (lambda / 2) ||b||^2`.
///
/// Uses the `q × q` normal equations when `q <= r` and the `r × r` dual
/// system otherwise.
pub fn fit_ridge<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    lambda: T,
) -> Result<SlopeFit<T>> {
    solve(x, y, lambda, Variant::Ridge)
}

/// Least squares; needs a centered design of full column rank.
pub fn fit_ols<T: Scalar>(x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> Result<SlopeFit<T>> {
    solve(x, y, T::zero(), Variant::Ols)
}

fn solve<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    lambda: T,
    variant: Variant,
) -> Result<SlopeFit<T>> {
    check_shapes(x, y)?;
    if !(lambda >= T::zero()) || !lambda.is_finite() {
        return Err(Error::invalid(format!("lambda {lambda} must be a nonnegative number")));
    }
    let (r, q) = x.dim();
    let rf = T::from_count(r);
    let x_mean = x.sum_axis(Axis(0)).mapv(|s| s / rf);
    let y_mean = y.sum() / rf;
    let xc = &x - &x_mean.view().insert_axis(Axis(0));
    let yc = y.mapv(|v| v - y_mean);

    let slopes = if q == 0 {
        Array1::zeros(0)
    } else if q <= r {
        let mut gram: Array2<T> = xc.t().dot(&xc) / rf;
        for j in 0..q {
            gram[[j, j]] += lambda;
        }
        let rhs = xc.t().dot(&yc) / rf;
        cholesky_solve(&gram, &rhs)
            .ok_or_else(|| Error::invalid("design is rank deficient; least squares has no unique solution"))?
    } else {
        if lambda == T::zero() {
            return Err(Error::invalid(format!(
                "least squares needs at least as many rows as covariates ({r} < {q})"
            )));
        }
        let mut kernel: Array2<T> = xc.dot(&xc.t()) / rf;
        for i in 0..r {
            kernel[[i, i]] += lambda;
        }
        let alpha = cholesky_solve(&kernel, &(yc / rf))
            .ok_or_else(|| Error::invalid("ridge dual system is singular"))?;
        xc.t().dot(&alpha)
    };

    let mut coefficients = Array1::zeros(q + 1);
    coefficients[0] = y_mean - slopes.dot(&x_mean);
    coefficients.slice_mut(ndarray::s![1..]).assign(&slopes);
    Ok(SlopeFit {
        coefficients,
        solver: variant,
        lambda,
        iterations: 1,
        converged: true,
    })
}
