//! Cyclic coordinate descent for the standardized lasso
//! `(2r)^-1 ||y - X g||^2 + sum_j pen_j |g_j|`, where every live column of
//! `X` has mean 0 and `||x_j||^2 / r = 1`.

use ndarray::{Array1, ArrayView2};

use crate::scalar::Scalar;

#[inline]
pub(crate) fn soft_threshold<T: Scalar>(z: T, gamma: T) -> T {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        T::zero()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct CdOutcome {
    pub sweeps: usize,
    pub converged: bool,
}

pub(crate) fn objective<T: Scalar>(resid: &Array1<T>, gamma: &Array1<T>, pen: &[T]) -> T {
    let r = T::from_count(resid.len());
    let l1: T = gamma.iter().zip(pen).map(|(&g, &p)| p * g.abs()).sum();
    resid.dot(resid) / (T::lit(2.0) * r) + l1
}

/// Runs sweeps until the largest coordinate change drops below `tol`.
///
/// `gamma` is the warm start and `resid` must equal `y - X gamma` on entry;
/// both are updated in place. After each full sweep the solver iterates on
/// the active set only, then re-checks with a full sweep. When `trace` is
/// given, the objective after every sweep is appended to it.
#[allow(clippy::too_many_arguments)]
pub(crate) fn coordinate_descent<T: Scalar>(
    xt: ArrayView2<'_, T>,
    live: &[bool],
    pen: &[T],
    gamma: &mut Array1<T>,
    resid: &mut Array1<T>,
    tol: T,
    max_sweeps: usize,
    mut trace: Option<&mut Vec<T>>,
) -> CdOutcome {
    let r = T::from_count(xt.ncols());
    let q = xt.nrows();
    let mut sweeps = 0;

    let sweep = |only_active: bool, gamma: &mut Array1<T>, resid: &mut Array1<T>| -> T {
        let mut max_delta = T::zero();
        for j in 0..q {
            if !live[j] || (only_active && gamma[j] == T::zero()) {
                continue;
            }
            let xj = xt.row(j);
            let old = gamma[j];
            let z = old + xj.dot(&*resid) / r;
            let new = soft_threshold(z, pen[j]);
            let delta = new - old;
            if delta != T::zero() {
                resid.scaled_add(-delta, &xj);
                gamma[j] = new;
                max_delta = max_delta.max(delta.abs());
            }
        }
        max_delta
    };

    loop {
        let delta = sweep(false, gamma, resid);
        sweeps += 1;
        if let Some(t) = trace.as_deref_mut() {
            t.push(objective(resid, gamma, pen));
        }
        if delta < tol {
            return CdOutcome {
                sweeps,
                converged: true,
            };
        }
        if sweeps >= max_sweeps {
            return CdOutcome {
                sweeps,
                converged: false,
            };
        }
        loop {
            let delta = sweep(true, gamma, resid);
            sweeps += 1;
            if let Some(t) = trace.as_deref_mut() {
                t.push(objective(resid, gamma, pen));
            }
            if delta < tol {
                break;
            }
            if sweeps >= max_sweeps {
                return CdOutcome {
                    sweeps,
                    converged: false,
                };
            }
        }
    }
}
