//! Population mean and variance of the response for each model.
//!
//! Closed forms are used wherever they exist. The nonlinear example reduces
//! to a one-dimensional integral against a normal density; the treatment
//! design has no closed-form outcome variance and uses a large Monte Carlo
//! oracle, cached per configuration.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthSource {
    Analytic,
    Oracle,
}

/// True target values. For the treatment design `theta` is the average
/// treatment effect and `sigma_y_sq` the variance of the observed outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthValues {
    pub theta: f64,
    pub sigma_y_sq: f64,
    pub source: TruthSource,
    /// Monte Carlo sample size behind an oracle truth.
    pub oracle_draws: Option<u64>,
}

impl TruthValues {
    pub fn analytic(theta: f64, sigma_y_sq: f64) -> Self {
        Self {
            theta,
            sigma_y_sq,
            source: TruthSource::Analytic,
            oracle_draws: None,
        }
    }

    /// `theta / sigma_y`, the standardized effect for the treatment design.
    pub fn effect_size(&self) -> f64 {
        self.theta / self.sigma_y_sq.sqrt()
    }
}

/// Moments of `Y = 0.1 U² + U + N(0, 1)` where `U = c + Σ a_l Z_l` and the
/// `Z_l` are iid with unit second, third and fourth cumulants (centered
/// Poisson(1)).
pub fn quadratic_poisson_truth(a: &[f64], c: f64) -> TruthValues {
    let k2: f64 = a.iter().map(|v| v * v).sum();
    let k3: f64 = a.iter().map(|v| v.powi(3)).sum();
    let k4: f64 = a.iter().map(|v| v.powi(4)).sum();
    let slope = 0.2 * c + 1.0;
    let theta = 0.1 * (k2 + c * c) + c;
    let var = 1.0 + 0.01 * (k4 + 2.0 * k2 * k2) + slope * slope * k2 + 0.2 * slope * k3;
    TruthValues::analytic(theta, var)
}

/// Heteroscedastic example with `v` standard normal covariates:
/// `Y = S + (a Q + S) η`, `S = Σ X_j`, `Q = Σ X_j²`.
pub fn ex1_truth(v: usize, a: f64) -> TruthValues {
    let v = v as f64;
    TruthValues::analytic(0.0, 2.0 * v + a * a * (2.0 * v + v * v))
}

/// Where `0.8 |s| + 0.01 = 1`, the kink of the nonlinear example.
pub const EX2_KINK: f64 = 0.99 / 0.8;

/// The nonlinear part of the second example.
pub fn ex2_link(s: f64) -> f64 {
    (0.8 * s.abs() + 0.01).ln().abs()
}

/// Composite Simpson rule with `intervals` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    let h = (hi - lo) / intervals as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + h * i as f64);
    }
    acc * h / 3.0
}

/// `E[h(S)]` for `S ~ N(0, v)` and even `h` that is smooth away from the kink.
fn normal_even_expectation(v: f64, h: impl Fn(f64) -> f64) -> f64 {
    let sd = v.sqrt();
    let density = |s: f64| (-(s * s) / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
    let g = |s: f64| h(s) * density(s);
    let tail = 40.0 * sd;
    let kink = EX2_KINK.min(tail);
    2.0 * (simpson(g, 0.0, kink, 20_000) + simpson(g, kink, tail.max(kink), 200_000))
}

/// Nonlinear example with `v` standard normal covariates:
/// `Y = a |log(0.8 |S| + 0.01)| + S + η`. The link is even, so it is
/// uncorrelated with `S` and `Var Y = a² Var g(S) + v + 1`.
pub fn ex2_truth(v: usize, a: f64) -> TruthValues {
    let vf = v as f64;
    let m1 = normal_even_expectation(vf, ex2_link);
    let m2 = normal_even_expectation(vf, |s| ex2_link(s).powi(2));
    TruthValues::analytic(a * m1, a * a * (m2 - m1 * m1) + vf + 1.0)
}

/// Draws used by the treatment-design oracle.
pub const CAUSAL_ORACLE_DRAWS: u64 = 10_000_000;
const ORACLE_CHUNKS: u64 = 100;
const ORACLE_SEED: u64 = 0x005e_ed0a_11ca_05a1;

/// Clip bound on the linear index of the treatment design's propensity.
pub const CAUSAL_LOGIT_CLIP: f64 = 2.0;

/// Propensity index `X1 - X2`, clipped to `[-2, 2]`.
pub fn causal_logit(x: impl IntoIterator<Item = f64>) -> f64 {
    let mut it = x.into_iter();
    let (x1, x2) = (it.next().unwrap_or(0.0), it.next().unwrap_or(0.0));
    (x1 - x2).clamp(-CAUSAL_LOGIT_CLIP, CAUSAL_LOGIT_CLIP)
}

pub fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// Potential outcome means given the signal `S = X1 + ... + X_{s0}`:
/// treated `1 + S`, control `0.5 S`.
pub fn causal_outcome_means(signal: f64) -> (f64, f64) {
    (1.0 + signal, 0.5 * signal)
}

/// Running (count, mean, sum of squared deviations).
#[derive(Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, y: f64) {
        self.n += 1.0;
        let d = y - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (y - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * o.n / n,
            m2: self.m2 + o.m2 + d * d * self.n * o.n / n,
        }
    }
}

fn causal_oracle(s0: usize, draws: u64) -> TruthValues {
    let per_chunk = draws / ORACLE_CHUNKS;
    let parts: Vec<Moments> = (0..ORACLE_CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(ORACLE_SEED);
            rng.set_stream(chunk);
            let mut acc = Moments::default();
            let mut x = vec![0.0; s0.max(2)];
            for _ in 0..per_chunk {
                for v in x.iter_mut() {
                    *v = rng.sample(StandardNormal);
                }
                let e = sigmoid(causal_logit(x.iter().copied()));
                let treated = rng.random::<f64>() < e;
                let (mu1, mu0) = causal_outcome_means(x[..s0].iter().sum());
                let noise: f64 = rng.sample(StandardNormal);
                acc.push(if treated { mu1 } else { mu0 } + noise);
            }
            acc
        })
        .collect();
    let total = parts.into_iter().reduce(Moments::merge).unwrap_or_default();
    TruthValues {
        theta: 1.0,
        sigma_y_sq: total.m2 / (total.n - 1.0),
        source: TruthSource::Oracle,
        oracle_draws: Some(per_chunk * ORACLE_CHUNKS),
    }
}

/// Treatment-design truth: the effect is exactly 1 (the covariates are
/// centered); the outcome variance comes from a cached oracle.
pub fn causal_truth(s0: usize) -> TruthValues {
    static CACHE: OnceLock<Mutex<HashMap<usize, TruthValues>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("truth cache poisoned").get(&s0) {
        return *t;
    }
    let t = causal_oracle(s0, CAUSAL_ORACLE_DRAWS);
    cache.lock().expect("truth cache poisoned").insert(s0, t);
    t
}
