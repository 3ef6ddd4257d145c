//! L1-penalized logistic regression for propensity scores.
//!
//! Minimizes `-(1/r) sum_i loglik_i + lambda ||b||_1` (intercept free) by
//! proximal Newton: each outer step forms the weighted least-squares
//! approximation of the log-likelihood and solves it by coordinate descent.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis, Zip};
use rayon::prelude::*;
use serde::Serialize;

use super::cd::soft_threshold;
use super::lasso::lambda_grid;
use super::standardize::Standardized;
use super::{LearnerSpec, Penalty, PropensityModel, Variant, CV_GRID_LEN};
use crate::data::TrimBounds;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

const PROB_FLOOR: f64 = 1e-5;
const MAX_NEWTON: usize = 100;
/// Smallest penalty on the logistic grid, relative to the kill threshold.
const LOGISTIC_GRID_RATIO: f64 = 1e-2;
const PATH_MAX_EXPLAINED: f64 = 0.999;
const PATH_MIN_GAIN: f64 = 1e-5;
const PATH_MIN_POINTS: usize = 5;
const CV_SCREEN_TOL: f64 = 1e-4;
/// Grid points scored past the current held-out deviance minimum.
const CV_PATIENCE: usize = 10;

#[inline]
fn sigmoid<T: Scalar>(eta: T) -> T {
    if eta >= T::zero() {
        T::one() / (T::one() + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (T::one() + e)
    }
}

/// Fitted logistic propensity model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropensityFit<T> {
    /// Length `p`, intercept first.
    pub coefficients: Array1<T>,
    pub lambda: T,
    pub trim: TrimBounds,
    pub converged: bool,
}

impl<T: Scalar> PropensityFit<T> {
    /// Probability before trimming.
    pub fn raw_probability(&self, x: ArrayView1<'_, T>) -> T {
        sigmoid(self.coefficients[0] + self.coefficients.slice(ndarray::s![1..]).dot(&x))
    }

    pub fn predict(&self, x: ArrayView1<'_, T>) -> T {
        self.trim.clip(self.raw_probability(x))
    }
}

impl<T: Scalar> PropensityModel<T> for PropensityFit<T> {
    fn predict(&self, x: ArrayView1<'_, T>) -> T {
        PropensityFit::predict(self, x)
    }
}

#[derive(Clone)]
struct State<T> {
    intercept: T,
    gamma: Array1<T>,
}

/// Proximal Newton iterations at one penalty level, warm-started from `state`.
fn solve_at<T: Scalar>(
    std: &Standardized<T>,
    live: &[bool],
    d: &Array1<T>,
    pen: &[T],
    state: &mut State<T>,
    tol: T,
    max_sweeps: usize,
) -> bool {
    let r = T::from_count(std.r());
    let q = std.q();
    let floor = T::lit(PROB_FLOOR);
    let mut sweeps_left = max_sweeps;
    for _ in 0..MAX_NEWTON {
        let eta = std.xt.t().dot(&state.gamma).mapv(|v| v + state.intercept);
        let mut w = Array1::<T>::zeros(d.len());
        let mut resid = Array1::<T>::zeros(d.len());
        Zip::from(&mut w)
            .and(&mut resid)
            .and(&eta)
            .and(d)
            .for_each(|w, z, &e, &di| {
                let p = sigmoid(e).max(floor).min(T::one() - floor);
                *w = p * (T::one() - p);
                *z = (di - p) / *w;
            });
        let w_sum = w.sum();
        let curv: Vec<T> = (0..q)
            .map(|j| {
                if live[j] {
                    Zip::from(std.xt.row(j))
                        .and(&w)
                        .fold(T::zero(), |acc, &x, &wi| acc + wi * x * x)
                        / r
                } else {
                    T::zero()
                }
            })
            .collect();

        let start_intercept = state.intercept;
        let start_gamma = state.gamma.clone();
        let sweep = |only_active: bool, state: &mut State<T>, resid: &mut Array1<T>| -> T {
            let mut max_delta = T::zero();
            let db = Zip::from(&w).and(&*resid).fold(T::zero(), |a, &wi, &ri| a + wi * ri) / w_sum;
            if db != T::zero() {
                state.intercept += db;
                resid.mapv_inplace(|v| v - db);
                max_delta = max_delta.max(db.abs());
            }
            for j in 0..q {
                if !live[j] || curv[j] <= T::zero() || (only_active && state.gamma[j] == T::zero()) {
                    continue;
                }
                let xj = std.xt.row(j);
                let g = Zip::from(xj)
                    .and(&w)
                    .and(&*resid)
                    .fold(T::zero(), |a, &x, &wi, &ri| a + x * wi * ri)
                    / r;
                let old = state.gamma[j];
                let new = soft_threshold(curv[j] * old + g, pen[j]) / curv[j];
                let delta = new - old;
                if delta != T::zero() {
                    resid.scaled_add(-delta, &xj);
                    state.gamma[j] = new;
                    max_delta = max_delta.max(delta.abs());
                }
            }
            max_delta
        };
        // full sweeps to find the active set, then iterate on it
        'outer: loop {
            let full = sweep(false, state, &mut resid);
            sweeps_left = sweeps_left.saturating_sub(1);
            if full < tol || sweeps_left == 0 {
                break;
            }
            loop {
                let delta = sweep(true, state, &mut resid);
                sweeps_left = sweeps_left.saturating_sub(1);
                if sweeps_left == 0 {
                    break 'outer;
                }
                if delta < tol {
                    break;
                }
            }
        }
        let moved = state
            .gamma
            .iter()
            .zip(start_gamma.iter())
            .map(|(a, b)| (*a - *b).abs())
            .fold((state.intercept - start_intercept).abs(), T::max);
        if moved < tol {
            return true;
        }
        if sweeps_left == 0 {
            return false;
        }
    }
    false
}

fn kill_threshold<T: Scalar>(std: &Standardized<T>, d: &Array1<T>) -> T {
    let r = T::from_count(d.len());
    let mean = d.sum() / r;
    let centered = d.mapv(|v| v - mean);
    (0..std.q())
        .filter(|&j| std.x_scale[j] > T::zero())
        .map(|j| (std.xt.row(j).dot(&centered) / r * std.x_scale[j]).abs())
        .fold(T::zero(), T::max)
}

fn penalties<T: Scalar>(std: &Standardized<T>, lambda: T) -> Vec<T> {
    std.x_scale
        .iter()
        .map(|&s| if s > T::zero() { lambda / s } else { T::zero() })
        .collect()
}

fn to_fit<T: Scalar>(std: &Standardized<T>, state: &State<T>, lambda: T, trim: TrimBounds, converged: bool) -> PropensityFit<T> {
    let mut coefficients = std.to_raw(state.gamma.view(), T::zero(), T::one());
    coefficients[0] += state.intercept;
    PropensityFit {
        coefficients,
        lambda,
        trim,
        converged,
    }
}

fn intercept_start<T: Scalar>(d: &Array1<T>, q: usize) -> State<T> {
    let floor = T::lit(PROB_FLOOR);
    let rate = (d.sum() / T::from_count(d.len())).max(floor).min(T::one() - floor);
    State {
        intercept: (rate / (T::one() - rate)).ln(),
        gamma: Array1::zeros(q),
    }
}

fn training_deviance<T: Scalar>(std: &Standardized<T>, d: &[bool], state: &State<T>) -> T {
    let eta = std.xt.t().dot(&state.gamma);
    eta.iter().zip(d).map(|(&e, &di)| deviance(sigmoid(e + state.intercept), di)).sum()
}

/// Warm-started path over a descending grid, one penalty at a time. Stops
/// early like glmnet once the deviance explained is nearly complete or
/// stops growing; later steps then return the last state.
struct PathWalker<'a, T: Scalar> {
    std: &'a Standardized<T>,
    d: &'a [bool],
    dv: &'a Array1<T>,
    live: Vec<bool>,
    state: State<T>,
    null: T,
    last: T,
    points: usize,
    done: bool,
    tol: T,
    max_sweeps: usize,
}

impl<'a, T: Scalar> PathWalker<'a, T> {
    fn new(std: &'a Standardized<T>, d: &'a [bool], dv: &'a Array1<T>, tol: T, max_sweeps: usize) -> Self {
        let state = intercept_start(dv, std.q());
        let null = training_deviance(std, d, &state);
        Self {
            std,
            d,
            dv,
            live: std.live(),
            state,
            null,
            last: T::zero(),
            points: 0,
            done: false,
            tol,
            max_sweeps,
        }
    }

    fn step(&mut self, lambda: T) -> &State<T> {
        if self.done {
            return &self.state;
        }
        solve_at(self.std, &self.live, self.dv, &penalties(self.std, lambda), &mut self.state, self.tol, self.max_sweeps);
        self.points += 1;
        let explained = T::one() - training_deviance(self.std, self.d, &self.state) / self.null;
        if self.points >= PATH_MIN_POINTS
            && (explained > T::lit(PATH_MAX_EXPLAINED) || explained - self.last < T::lit(PATH_MIN_GAIN) * explained)
        {
            self.done = true;
        }
        self.last = explained;
        &self.state
    }
}

fn deviance<T: Scalar>(p: T, d: bool) -> T {
    let floor = T::lit(PROB_FLOOR);
    let p = p.max(floor).min(T::one() - floor);
    let two = T::lit(2.0);
    if d {
        -two * p.ln()
    } else {
        -two * (T::one() - p).ln()
    }
}

/// L1-penalized logistic regression. `spec.lambda` gives the penalty; `cv`
/// and `auto` both select it by `spec.cv_folds`-fold cross-validation on
/// held-out deviance (rows `i mod cv_folds`). A `zero` variant fits the
/// intercept only. Penalties are scored on paths solved to a coarse
/// tolerance and the winning fit is refined to `spec.tolerance`.
pub fn fit_logistic_lasso<T: Scalar>(
    x: ArrayView2<'_, T>,
    d: &[bool],
    spec: &LearnerSpec<T>,
    trim: TrimBounds,
) -> Result<PropensityFit<T>> {
    let (r, _) = x.dim();
    if d.len() != r {
        return Err(Error::DimensionMismatch(format!("{r} design rows but {} treatments", d.len())));
    }
    let treated = d.iter().filter(|&&v| v).count();
    if treated == 0 || treated == r {
        return Err(Error::invalid("treatment vector has a single class; propensity is unidentified"));
    }
    let dv: Array1<T> = d.iter().map(|&v| if v { T::one() } else { T::zero() }).collect();
    let std = Standardized::new(x);

    if spec.variant == Variant::Zero {
        let state = intercept_start(&dv, std.q());
        return Ok(to_fit(&std, &state, T::infinity(), trim, true));
    }

    let lambda = match spec.lambda {
        Penalty::Fixed(l) => {
            if !(l >= T::zero()) || !l.is_finite() {
                return Err(Error::invalid(format!("lambda {l} must be a nonnegative number")));
            }
            l
        }
        Penalty::CrossValidated | Penalty::Auto => return fit_logistic_cv(x, d, &dv, &std, spec, trim),
    };
    let mut state = intercept_start(&dv, std.q());
    let ok = solve_at(&std, &std.live(), &dv, &penalties(&std, lambda), &mut state, spec.tolerance, spec.max_iters);
    Ok(to_fit(&std, &state, lambda, trim, ok))
}

fn fit_logistic_cv<T: Scalar>(
    x: ArrayView2<'_, T>,
    d: &[bool],
    dv: &Array1<T>,
    std: &Standardized<T>,
    spec: &LearnerSpec<T>,
    trim: TrimBounds,
) -> Result<PropensityFit<T>> {
    let r = d.len();
    let folds = spec.cv_folds;
    if folds < 2 || r < folds {
        return Err(Error::invalid(format!("{r} rows is fewer than cv_folds = {folds}")));
    }
    let lambda_max = kill_threshold(std, dv);
    if lambda_max <= T::zero() {
        let state = intercept_start(dv, std.q());
        return Ok(to_fit(std, &state, T::zero(), trim, true));
    }
    let grid = lambda_grid(lambda_max, LOGISTIC_GRID_RATIO, CV_GRID_LEN);
    let screen_tol = spec.tolerance.max(T::lit(CV_SCREEN_TOL));

    struct FoldData<T> {
        test: Vec<usize>,
        d_train: Vec<bool>,
        dv_train: Array1<T>,
        std: Option<Standardized<T>>,
        constant: T,
    }
    let data: Vec<FoldData<T>> = (0..folds)
        .map(|f| {
            let train: Vec<usize> = (0..r).filter(|i| i % folds != f).collect();
            let d_train: Vec<bool> = train.iter().map(|&i| d[i]).collect();
            let n1 = d_train.iter().filter(|&&v| v).count();
            // a single-class training block predicts its constant rate
            let std = (n1 > 0 && n1 < train.len()).then(|| Standardized::new(x.select(Axis(0), &train).view()));
            FoldData {
                test: (0..r).filter(|i| i % folds == f).collect(),
                dv_train: dv.select(Axis(0), &train),
                constant: T::from_count(n1) / T::from_count(train.len()),
                d_train,
                std,
            }
        })
        .collect();
    let mut walkers: Vec<Option<PathWalker<'_, T>>> = data
        .iter()
        .map(|f| f.std.as_ref().map(|s| PathWalker::new(s, &f.d_train, &f.dv_train, screen_tol, spec.max_iters)))
        .collect();

    // Fold paths advance together; once the pooled held-out deviance has
    // gone CV_PATIENCE points without a new minimum the rest of the grid is
    // not explored.
    let mut best = 0;
    let mut best_dev = T::infinity();
    for (l, &lambda) in grid.iter().enumerate() {
        let dev: T = walkers
            .par_iter_mut()
            .zip(data.par_iter())
            .map(|(walker, fold)| match walker {
                Some(w) => {
                    let std = fold.std.as_ref().expect("walker has a design");
                    let fit = to_fit(std, w.step(lambda), lambda, trim, true);
                    fold.test.iter().map(|&i| deviance(fit.raw_probability(x.row(i)), d[i])).sum()
                }
                None => fold.test.iter().map(|&i| deviance(fold.constant, d[i])).sum::<T>(),
            })
            .collect::<Vec<T>>()
            .into_iter()
            .fold(T::zero(), |a, v| a + v);
        if dev <= best_dev {
            best = l;
            best_dev = dev;
        } else if l >= best + CV_PATIENCE {
            break;
        }
    }
    let mut full = PathWalker::new(std, d, dv, screen_tol, spec.max_iters);
    for &lambda in &grid[..best] {
        full.step(lambda);
    }
    let mut state = full.state;
    let ok = solve_at(std, &std.live(), dv, &penalties(std, grid[best]), &mut state, spec.tolerance, spec.max_iters);
    Ok(to_fit(std, &state, grid[best], trim, ok))
}
