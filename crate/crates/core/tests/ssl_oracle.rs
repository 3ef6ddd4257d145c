//! The mean and variance estimators against a straight-line evaluation of
//! their defining sums, plus the structural invariants.

// The oracles mirror the formulas index by index.
#![allow(clippy::type_complexity)]

use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssinfer::{
    estimate_mean, estimate_mean_multi, estimate_mean_variance, estimate_variance, make_partition,
    mean_from_slopes, mean_over_partitions, moment_cache, variance_from_slopes, FoldPartition, LabeledSet,
    LearnerSpec, MeanInference, Penalty, UnlabeledSet, Variant,
};

struct Oracle {
    per_fold: Vec<f64>,
    theta: f64,
    sigma_eps_sq: f64,
    b_sq: f64,
    sigma_y_sq: f64,
    sigma_xi_sq: f64,
    sigma_nu_sq: f64,
}

/// Direct evaluation with explicit loops and explicit `V V'` matrices.
fn oracle(y: &[f64], x: &[Vec<f64>], u: &[Vec<f64>], assign: &[usize], k: usize, slopes: &[Vec<f64>]) -> Oracle {
    let n = y.len();
    let m = u.len();
    let p = x[0].len() + 1;
    let aug = |row: &Vec<f64>| {
        let mut v = vec![1.0];
        v.extend_from_slice(row);
        v
    };
    let mut mu = vec![0.0; p];
    for row in u {
        let a = aug(row);
        for j in 0..p {
            mu[j] += a[j] / m as f64;
        }
    }
    let mut c = vec![vec![0.0; p]; p];
    for row in u {
        let a = aug(row);
        for i in 0..p {
            for j in 0..p {
                c[i][j] += (a[i] - mu[i]) * (a[j] - mu[j]) / m as f64;
            }
        }
    }
    let quad = |b: &[f64], mat: &Vec<Vec<f64>>| {
        let mut s = 0.0;
        for i in 0..p {
            for j in 0..p {
                s += b[i] * mat[i][j] * b[j];
            }
        }
        s
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let folds: Vec<Vec<usize>> = (0..k).map(|f| (0..n).filter(|&i| assign[i] == f).collect()).collect();

    let mut per_fold = vec![];
    for f in 0..k {
        let b = &slopes[f];
        let avg: f64 = folds[f].iter().map(|&i| y[i] - dot(&aug(&x[i]), b)).sum::<f64>() / folds[f].len() as f64;
        per_fold.push(dot(&mu, b) + avg);
    }
    let theta = per_fold.iter().sum::<f64>() / k as f64;

    let (mut se, mut bs, mut sy) = (0.0, 0.0, 0.0);
    let mut nus = vec![];
    let mut xis = vec![];
    for f in 0..k {
        let b = &slopes[f];
        let size = folds[f].len() as f64;
        let bcb = quad(b, &c);
        let (mut e2, mut cross, mut syk) = (0.0, 0.0, 0.0);
        for &i in &folds[f] {
            let v: Vec<f64> = aug(&x[i]).iter().zip(&mu).map(|(a, m)| a - m).collect();
            let eps = y[i] - theta - dot(b, &v);
            e2 += eps * eps;
            cross += dot(b, &v) * eps;
            let mut diff = c.clone();
            for r in 0..p {
                for s in 0..p {
                    diff[r][s] -= v[r] * v[s];
                }
            }
            syk += (y[i] - theta).powi(2) + quad(b, &diff);
            xis.push(-quad(b, &diff));
            nus.push((f, eps * eps + 2.0 * dot(b, &v) * eps + bcb));
        }
        se += e2 / size;
        bs += bcb + 2.0 * cross / size;
        sy += syk / size;
    }
    let sigma_y_sq = sy / k as f64;
    Oracle {
        per_fold,
        theta,
        sigma_eps_sq: se / k as f64,
        b_sq: bs / k as f64,
        sigma_y_sq,
        sigma_xi_sq: xis.iter().map(|v| v * v).sum::<f64>() / n as f64,
        sigma_nu_sq: nus.iter().map(|(_, eta)| (eta - sigma_y_sq).powi(2)).sum::<f64>() / n as f64,
    }
}

fn to_sets(y: &[f64], x: &[Vec<f64>], u: &[Vec<f64>]) -> (LabeledSet<f64>, UnlabeledSet<f64>) {
    let q = x[0].len();
    let xm = Array2::from_shape_fn((x.len(), q), |(i, j)| x[i][j]);
    let um = Array2::from_shape_fn((u.len(), q), |(i, j)| u[i][j]);
    (
        LabeledSet::new(Array1::from(y.to_vec()), xm).unwrap(),
        UnlabeledSet::new(um).unwrap(),
    )
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn check_against_oracle(y: &[f64], x: &[Vec<f64>], u: &[Vec<f64>], assign: Vec<usize>, slopes: &[Vec<f64>]) {
    let (l, ul) = to_sets(y, x, u);
    let cache = moment_cache(&ul).unwrap();
    let k = slopes.len();
    let part = FoldPartition::from_assignment(k, assign.clone()).unwrap();
    let s: Vec<Array1<f64>> = slopes.iter().map(|b| Array1::from(b.clone())).collect();
    let mean = mean_from_slopes(&l, &cache, &part, &s, 0.05).unwrap();
    let var = variance_from_slopes(&l, &cache, &part, &s, 0.05).unwrap();
    let o = oracle(y, x, u, &assign, k, slopes);
    for (a, b) in mean.per_fold.iter().zip(&o.per_fold) {
        assert!(close(*a, *b, 1e-10), "fold theta {a} vs {b}");
    }
    assert!(close(mean.theta_hat, o.theta, 1e-10));
    assert!(close(mean.sigma_eps_sq, o.sigma_eps_sq, 1e-10));
    assert!(close(mean.b_sq, o.b_sq, 1e-10), "{} vs {}", mean.b_sq, o.b_sq);
    assert!(close(var.sigma_y_sq_hat, o.sigma_y_sq, 1e-10));
    assert!(close(var.sigma_xi_sq, o.sigma_xi_sq, 1e-10));
    assert!(close(var.sigma_nu_sq, o.sigma_nu_sq, 1e-10));
    let ratio = y.len() as f64 / u.len() as f64;
    assert!(close(mean.var_hat, o.sigma_eps_sq + ratio * o.b_sq.max(0.0), 1e-10));
    assert!(close(var.var_hat, o.sigma_nu_sq + ratio * o.sigma_xi_sq, 1e-10));
}

#[test]
fn tiny_instance_with_injected_slopes() {
    let y = [1.2, -0.4, 2.5, 0.7];
    let x = vec![vec![0.5, 1.0], vec![-1.0, 0.3], vec![2.0, -0.7], vec![0.1, 0.9]];
    let u = vec![vec![0.0, 1.5], vec![1.0, -0.5]];
    let slopes = vec![vec![0.3, 0.8, -0.2], vec![-0.1, 0.5, 1.1]];
    check_against_oracle(&y, &x, &u, vec![0, 1, 0, 1], &slopes);
}

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<usize>, Vec<Vec<f64>>)> {
    (4usize..=6, 1usize..=3, 1usize..=5).prop_flat_map(|(n, q, m)| {
        (
            prop::collection::vec(-5.0..5.0f64, n),
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, q), n),
            prop::collection::vec(prop::collection::vec(-3.0..3.0f64, q), m),
            Just((0..n).map(|i| i % 2).collect::<Vec<_>>()).prop_shuffle(),
            prop::collection::vec(prop::collection::vec(-2.0..2.0f64, q + 1), 2),
        )
    })
}

proptest! {
    #[test]
    fn matches_direct_evaluation((y, x, u, assign, slopes) in instance()) {
        check_against_oracle(&y, &x, &u, assign, &slopes);
    }

    #[test]
    fn shift_equivariance((y, x, u, assign, slopes) in instance(), c in -10.0..10.0f64) {
        let (l, ul) = to_sets(&y, &x, &u);
        let shifted: Vec<f64> = y.iter().map(|v| v + c).collect();
        let (ls, _) = to_sets(&shifted, &x, &u);
        let cache = moment_cache(&ul).unwrap();
        let part = FoldPartition::from_assignment(2, assign).unwrap();
        let s: Vec<Array1<f64>> = slopes.iter().map(|b| Array1::from(b.clone())).collect();
        let (m0, v0) = (mean_from_slopes(&l, &cache, &part, &s, 0.05).unwrap(), variance_from_slopes(&l, &cache, &part, &s, 0.05).unwrap());
        let (m1, v1) = (mean_from_slopes(&ls, &cache, &part, &s, 0.05).unwrap(), variance_from_slopes(&ls, &cache, &part, &s, 0.05).unwrap());
        prop_assert!(close(m1.theta_hat, m0.theta_hat + c, 1e-10));
        prop_assert!(close(m1.sigma_eps_sq, m0.sigma_eps_sq, 1e-9));
        prop_assert!(close(m1.b_sq, m0.b_sq, 1e-9));
        prop_assert!(close(v1.sigma_y_sq_hat, v0.sigma_y_sq_hat, 1e-9));
        prop_assert!(close(v1.sigma_xi_sq, v0.sigma_xi_sq, 1e-9));
        prop_assert!(close(v1.sigma_nu_sq, v0.sigma_nu_sq, 1e-9));
    }

    #[test]
    fn scale_equivariance((y, x, u, assign, slopes) in instance(), a in 0.1..10.0f64) {
        let (l, ul) = to_sets(&y, &x, &u);
        let scaled: Vec<f64> = y.iter().map(|v| v * a).collect();
        let (ls, _) = to_sets(&scaled, &x, &u);
        let cache = moment_cache(&ul).unwrap();
        let part = FoldPartition::from_assignment(2, assign).unwrap();
        let s: Vec<Array1<f64>> = slopes.iter().map(|b| Array1::from(b.clone())).collect();
        let sa: Vec<Array1<f64>> = s.iter().map(|b| b * a).collect();
        let m0 = mean_from_slopes(&l, &cache, &part, &s, 0.05).unwrap();
        let v0 = variance_from_slopes(&l, &cache, &part, &s, 0.05).unwrap();
        let m1 = mean_from_slopes(&ls, &cache, &part, &sa, 0.05).unwrap();
        let v1 = variance_from_slopes(&ls, &cache, &part, &sa, 0.05).unwrap();
        prop_assert!(close(m1.theta_hat, a * m0.theta_hat, 1e-10));
        prop_assert!(close(m1.sigma_eps_sq, a * a * m0.sigma_eps_sq, 1e-10));
        prop_assert!(close(m1.b_sq, a * a * m0.b_sq, 1e-10));
        prop_assert!(close(v1.sigma_y_sq_hat, a * a * v0.sigma_y_sq_hat, 1e-10));
    }

    #[test]
    fn unlabeled_permutation_invariance((y, x, u, assign, slopes) in instance(), seed in any::<u64>()) {
        let (l, ul) = to_sets(&y, &x, &u);
        let mut perm = u.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..perm.len()).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let (_, up) = to_sets(&y, &x, &perm);
        let part = FoldPartition::from_assignment(2, assign).unwrap();
        let s: Vec<Array1<f64>> = slopes.iter().map(|b| Array1::from(b.clone())).collect();
        let c0 = moment_cache(&ul).unwrap();
        let c1 = moment_cache(&up).unwrap();
        let m0 = mean_from_slopes(&l, &c0, &part, &s, 0.05).unwrap();
        let m1 = mean_from_slopes(&l, &c1, &part, &s, 0.05).unwrap();
        let v0 = variance_from_slopes(&l, &c0, &part, &s, 0.05).unwrap();
        let v1 = variance_from_slopes(&l, &c1, &part, &s, 0.05).unwrap();
        prop_assert!(close(m0.theta_hat, m1.theta_hat, 1e-12));
        prop_assert!(close(v0.sigma_y_sq_hat, v1.sigma_y_sq_hat, 1e-12));
    }

    #[test]
    fn nonnegative_and_bracketing((y, x, u, assign, slopes) in instance()) {
        let (l, ul) = to_sets(&y, &x, &u);
        let cache = moment_cache(&ul).unwrap();
        let part = FoldPartition::from_assignment(2, assign).unwrap();
        let s: Vec<Array1<f64>> = slopes.iter().map(|b| Array1::from(b.clone())).collect();
        let m = mean_from_slopes(&l, &cache, &part, &s, 0.05).unwrap();
        let v = variance_from_slopes(&l, &cache, &part, &s, 0.05).unwrap();
        prop_assert!(m.sigma_eps_sq >= 0.0 && m.var_hat >= 0.0);
        prop_assert!(v.sigma_xi_sq >= 0.0 && v.sigma_nu_sq >= 0.0);
        prop_assert!(m.ci.0 <= m.theta_hat && m.theta_hat <= m.ci.1);
        prop_assert!(v.ci.0 <= v.sigma_y_sq_hat && v.sigma_y_sq_hat <= v.ci.1);
    }

    #[test]
    fn cache_is_psd_with_zero_border(u in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 3), 1..8)) {
        let um = Array2::from_shape_fn((u.len(), 3), |(i, j)| u[i][j]);
        let cache = moment_cache(&UnlabeledSet::new(um).unwrap()).unwrap();
        prop_assert_eq!(cache.mu_hat()[0], 1.0);
        let c = cache.c_hat();
        for j in 0..4 {
            prop_assert_eq!(c[[0, j]], 0.0);
            prop_assert_eq!(c[[j, 0]], 0.0);
            for i in 0..4 {
                prop_assert_eq!(c[[i, j]], c[[j, i]]);
            }
        }
        let mat = nalgebra::DMatrix::from_fn(4, 4, |i, j| c[[i, j]]);
        let eig = nalgebra::SymmetricEigen::new(mat);
        prop_assert!(eig.eigenvalues.iter().all(|&e| e >= -1e-10));
    }
}

fn random_problem(n: usize, m: usize, q: usize, seed: u64) -> (LabeledSet<f64>, UnlabeledSet<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = Array2::from_shape_fn((n, q), |_| rng.random::<f64>() * 2.0 - 1.0);
    let y = Array1::from_shape_fn(n, |i| 1.0 + 2.0 * x[[i, 0]] + rng.random::<f64>());
    let u = Array2::from_shape_fn((m, q), |_| rng.random::<f64>() * 2.0 - 1.0);
    (LabeledSet::new(y, x).unwrap(), UnlabeledSet::new(u).unwrap())
}

#[test]
fn zero_learner_reduces_to_sample_moments() {
    let (l, u) = random_problem(40, 30, 3, 9);
    let cache = moment_cache(&u).unwrap();
    let part = make_partition(40, 4, 2).unwrap();
    let (mean, var) = estimate_mean_variance(&l, &cache, &part, &LearnerSpec::zero(), 0.05).unwrap();
    let ybar = l.responses().mean().unwrap();
    assert!((mean.theta_hat - ybar).abs() < 1e-12);
    let s2 = l.responses().iter().map(|v| (v - mean.theta_hat).powi(2)).sum::<f64>() / 40.0;
    assert!((var.sigma_y_sq_hat - s2).abs() < 1e-12);
    assert_eq!(mean.b_sq, 0.0);
}

#[test]
fn separate_variance_call_matches_joint() {
    let (l, u) = random_problem(30, 50, 4, 3);
    let cache = moment_cache(&u).unwrap();
    let part = make_partition(30, 3, 5).unwrap();
    let learner = LearnerSpec::new(Variant::Lasso, Penalty::Fixed(0.05));
    let (mean, var) = estimate_mean_variance(&l, &cache, &part, &learner, 0.1).unwrap();
    let mean2 = estimate_mean(&l, &cache, &part, &learner, 0.1).unwrap();
    let var2 = estimate_variance(&l, &cache, &part, &learner, &mean2, 0.1).unwrap();
    assert_eq!(mean, mean2);
    assert_eq!(var, var2);
}

#[test]
fn single_partition_multi_reduces_exactly() {
    let (l, u) = random_problem(30, 50, 4, 4);
    let cache = moment_cache(&u).unwrap();
    let learner = LearnerSpec::new(Variant::Lasso, Penalty::Fixed(0.05));
    let multi = estimate_mean_multi(&l, &cache, 1, 3, &learner, 0.05, 77).unwrap();
    let part = make_partition(30, 3, 77).unwrap();
    let single = estimate_mean(&l, &cache, &part, &learner, 0.05).unwrap();
    assert_eq!(multi.theta_bar, single.theta_hat);
    assert_eq!(multi.var_bar, single.var_hat);
    assert_eq!(multi.ci, single.ci);
}

#[test]
fn identical_partitions_have_no_between_term() {
    let (l, u) = random_problem(30, 50, 4, 5);
    let cache = moment_cache(&u).unwrap();
    let part = make_partition(30, 3, 1).unwrap();
    let learner = LearnerSpec::new(Variant::Ridge, Penalty::Fixed(0.1));
    let run = estimate_mean(&l, &cache, &part, &learner, 0.05).unwrap();
    let runs: Vec<MeanInference<f64>> = vec![run.clone(); 4];
    let multi = mean_over_partitions(&runs, vec![1; 4], 0.05).unwrap();
    assert_eq!(multi.theta_bar, run.theta_hat);
    assert_eq!(multi.var_bar, run.var_hat);
}

#[test]
fn multi_variance_dominates_average() {
    let (l, u) = random_problem(40, 60, 5, 6);
    let cache = moment_cache(&u).unwrap();
    let learner = LearnerSpec::new(Variant::Lasso, Penalty::Fixed(0.02));
    let multi = estimate_mean_multi(&l, &cache, 5, 2, &learner, 0.05, 0).unwrap();
    let avg = multi.variances.iter().sum::<f64>() / 5.0;
    assert!(multi.var_bar >= avg);
    assert!(estimate_mean_multi(&l, &cache, 0, 2, &learner, 0.05, 0).is_err());
}

#[test]
fn learner_failure_names_the_fold() {
    // OLS needs more rows than columns on every complement
    let (l, u) = random_problem(8, 10, 6, 7);
    let cache = moment_cache(&u).unwrap();
    let part = make_partition(8, 2, 0).unwrap();
    let err = estimate_mean(&l, &cache, &part, &LearnerSpec::new(Variant::Ols, Penalty::Fixed(0.0)), 0.05).unwrap_err();
    assert!(matches!(err, ssinfer::Error::Fold { fold: 0, .. }), "{err}");
}

#[test]
fn column_mismatch_is_rejected() {
    let (l, _) = random_problem(8, 10, 2, 8);
    let (_, u) = random_problem(8, 10, 3, 8);
    let cache = moment_cache(&u).unwrap();
    let part = make_partition(8, 2, 0).unwrap();
    assert!(estimate_mean(&l, &cache, &part, &LearnerSpec::zero(), 0.05).is_err());
}

#[test]
fn single_precision_instance() {
    let y = Array1::from(vec![1.0f32, 2.0, 3.0, 4.0]);
    let x = Array2::from_shape_vec((4, 1), vec![0.3f32, 0.1, 0.7, 0.2]).unwrap();
    let l = LabeledSet::new(y, x).unwrap();
    let u = UnlabeledSet::new(Array2::from_shape_vec((2, 1), vec![0.0f32, 2.0]).unwrap()).unwrap();
    let cache = moment_cache(&u).unwrap();
    let part = FoldPartition::from_assignment(2, vec![0, 0, 1, 1]).unwrap();
    let (mean, var) = estimate_mean_variance(&l, &cache, &part, &LearnerSpec::<f32>::zero(), 0.05).unwrap();
    assert_eq!(mean.theta_hat, 2.5f32);
    assert_eq!(var.sigma_y_sq_hat, 1.25f32);
    let fit = estimate_mean(&l, &cache, &part, &LearnerSpec::<f32>::new(Variant::Lasso, Penalty::Fixed(0.01)), 0.05).unwrap();
    assert!(fit.theta_hat.is_finite());
}
