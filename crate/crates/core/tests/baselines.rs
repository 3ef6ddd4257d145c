use ndarray::Array1;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ssinfer::{sample_kurtosis, sample_mean_ci, sample_variance_ci};

#[test]
fn gaussian_baselines_reach_nominal_coverage() {
    let (mu, sigma) = (2.0, 1.5);
    let reps = 500;
    let (mut hit_mean, mut hit_var) = (0, 0);
    for rep in 0..reps {
        let mut rng = ChaCha8Rng::seed_from_u64(rep);
        let y = Array1::from_shape_fn(500, |_| mu + sigma * rng.sample::<f64, _>(StandardNormal));
        let m = sample_mean_ci(y.view(), 0.05).unwrap();
        let v = sample_variance_ci(y.view(), 0.05).unwrap();
        hit_mean += usize::from(m.ci.0 <= mu && mu <= m.ci.1);
        hit_var += usize::from(v.ci.0 <= sigma * sigma && sigma * sigma <= v.ci.1);
    }
    let (cm, cv) = (hit_mean as f64 / reps as f64, hit_var as f64 / reps as f64);
    assert!((cm - 0.95).abs() <= 0.03, "mean coverage {cm}");
    assert!((cv - 0.95).abs() <= 0.03, "variance coverage {cv}");
}

#[test]
fn kurtosis_is_three_for_large_gaussian_samples() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let y = Array1::from_shape_fn(200_000, |_| rng.sample::<f64, _>(StandardNormal));
    let g = sample_kurtosis(y.view()).unwrap();
    assert!((g - 3.0).abs() < 0.05, "{g}");
}

#[test]
fn kurtosis_matches_hand_formula() {
    // y = 1,2,3,4: S^2 = 1.25, sum of fourth deviations = 2 * (1.5^4 + 0.5^4) = 10.25
    let y = Array1::from(vec![1.0f64, 2.0, 3.0, 4.0]);
    let expected = (4.0 * 5.0) / (3.0 * 2.0 * 1.0) * 10.25 / (1.25 * 1.25) - 3.0 * 9.0 / (2.0 * 1.0) + 3.0;
    assert!((sample_kurtosis(y.view()).unwrap() - expected).abs() < 1e-12);
}

#[test]
fn heavy_kurtosis_can_open_the_upper_end() {
    let mut y = vec![0.0f64; 30];
    y[0] = 100.0;
    let v = sample_variance_ci(Array1::from(y).view(), 0.05).unwrap();
    assert!(v.ci.0 > 0.0);
    assert!(v.ci.1.is_infinite());
}
