use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ssinfer_sim::{proportionality_r, r_study, ratio_from_draws, ModelVariant, SimModel, R_STUDY_HEADER};

const DRAWS: usize = 400_000;

fn example(variant: ModelVariant, covariates: usize) -> SimModel {
    SimModel::new(variant, 100, 1000, covariates + 1, 1).with_seed(3)
}

#[test]
fn linear_gaussian_gain_is_one_quarter() {
    // Y = S + η with S, η ~ N(0, 1): Var Y² = 8 and Var(η² + 2Sη) = 6
    let est = proportionality_r(&example(ModelVariant::Ex2, 1), 0.0, DRAWS).unwrap();
    assert!((est.r - 0.25).abs() < 3.0 * est.se, "{est:?}");
    assert!(est.se < 0.02);
}

#[test]
fn heteroscedastic_gain_matches_moment_calculation() {
    // Y = S (1 + η): Var Y² = 3 E(1+η)⁴ - 4 = 26, Var(S² (η² + 2η)) = 3·7 - 1 = 20
    let est = proportionality_r(&example(ModelVariant::Ex1, 1), 0.0, DRAWS).unwrap();
    assert!((est.r - 6.0 / 26.0).abs() < 3.0 * est.se, "{est:?}");
    assert!(est.r > 0.0);
}

#[test]
fn pure_noise_gives_no_gain() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = Array2::from_shape_simple_fn((DRAWS, 2), || rng.sample::<f64, _>(StandardNormal));
    let y = Array1::from_shape_simple_fn(DRAWS, || rng.sample::<f64, _>(StandardNormal));
    let (r, se) = ratio_from_draws(x.view(), y.view()).unwrap();
    assert!(r.abs() <= 3.0 * se.max(1e-6), "{r} ± {se}");
}

/// Spearman rank correlation of distinct values.
fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let (ra, rb) = (rank(a), rank(b));
    let n = a.len() as f64;
    let d2: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - y).powi(2)).sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

#[test]
fn nonlinearity_erodes_the_gain() {
    let grid = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0];
    let study = r_study(&example(ModelVariant::Ex2, 2), &grid, 200_000).unwrap();
    let r: Vec<f64> = study.iter().map(|e| e.r).collect();
    assert!(spearman(&grid, &r) < 0.0, "{r:?}");
    assert_eq!(R_STUDY_HEADER.split(',').count(), study[0].csv_row().split(',').count());
}

#[test]
fn invalid_requests() {
    assert!(proportionality_r(&example(ModelVariant::Ex1, 1), 0.0, 1000).is_err());
    assert!(proportionality_r(&SimModel::new(ModelVariant::M52, 10, 10, 3, 1), 0.0, DRAWS).is_err());
    let x = Array2::<f64>::zeros((1000, 1));
    let y = Array1::from_elem(1000, 2.0);
    assert!(ratio_from_draws(x.view(), y.view()).is_err());
}
