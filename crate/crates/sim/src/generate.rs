//! Dataset generation.

use ndarray::{Array1, Array2, Axis};
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, Poisson, StandardNormal};
use ssinfer::{CausalLabeledSetF64, CausalUnlabeledSetF64, LabeledSetF64, UnlabeledSetF64};

use crate::design::c1_sqrt;
use crate::error::Result;
use crate::model::{ModelVariant, SimModel};
use crate::truth::{
    causal_logit, causal_outcome_means, causal_truth, ex1_truth, ex2_link, ex2_truth, quadratic_poisson_truth,
    sigmoid, TruthValues,
};

/// One simulated replication.
#[derive(Debug, Clone)]
pub enum Dataset {
    Ssl {
        labeled: LabeledSetF64,
        unlabeled: UnlabeledSetF64,
    },
    Causal {
        labeled: CausalLabeledSetF64,
        unlabeled: CausalUnlabeledSetF64,
    },
}

/// Random number generator for replication `rep` of a model: the model seed
/// selects the key, the replication index the stream.
pub fn rep_rng(seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Precomputed pieces of a model (covariance root, coefficients, truth),
/// reused across replications.
#[derive(Debug, Clone)]
pub struct Generator {
    model: SimModel,
    root: Option<Array2<f64>>,
    beta: Array1<f64>,
    truth: TruthValues,
}

/// Sums of the first `s0` rows of a symmetric root: the loading of
/// `Σ_{j<s0} X_j` on the underlying iid coordinates.
fn loading(root: &Array2<f64>, s0: usize) -> Array1<f64> {
    root.rows().into_iter().take(s0).fold(Array1::zeros(root.ncols()), |acc, r| acc + r)
}

impl Generator {
    pub fn new(model: &SimModel) -> Result<Self> {
        model.validate()?;
        let q = model.q();
        let s0 = model.s0;
        let root = if model.variant.uses_c1() { Some(c1_sqrt(q)?) } else { None };
        let rs0 = (s0 as f64).sqrt();
        let mut beta = Array1::zeros(q);
        let truth = match model.variant {
            ModelVariant::M51 => {
                let w = loading(root.as_ref().expect("m51 uses C1"), s0);
                let b0 = 1.0 / w.dot(&w).sqrt();
                beta.slice_mut(ndarray::s![..s0]).fill(b0);
                TruthValues::analytic(s0 as f64 * b0, 2.0)
            }
            ModelVariant::M52 => {
                beta.slice_mut(ndarray::s![..s0]).fill(1.0 / rs0);
                quadratic_poisson_truth(&vec![1.0 / rs0; s0], rs0)
            }
            ModelVariant::M53 => {
                beta.slice_mut(ndarray::s![..s0]).fill(1.0 / rs0);
                let a = loading(root.as_ref().expect("m53 uses C1"), s0) / rs0;
                TruthValues::analytic(rs0, 1.0 + a.dot(&a))
            }
            ModelVariant::M54 => {
                beta.slice_mut(ndarray::s![..s0]).fill(1.0 / rs0);
                let a = loading(root.as_ref().expect("m54 uses C1"), s0) / rs0;
                quadratic_poisson_truth(a.as_slice().expect("contiguous"), rs0)
            }
            ModelVariant::Ex1 => ex1_truth(q, model.a),
            ModelVariant::Ex2 => ex2_truth(q, model.a),
            ModelVariant::CausalSynth => {
                beta.slice_mut(ndarray::s![..s0]).fill(1.0);
                causal_truth(s0)
            }
        };
        Ok(Self {
            model: model.clone(),
            root,
            beta,
            truth,
        })
    }

    pub fn model(&self) -> &SimModel {
        &self.model
    }

    pub fn truth(&self) -> TruthValues {
        self.truth
    }

    /// Slope vector of the linear index (without intercept): `β⁰` for the
    /// four main models, the signal pattern for the treatment design, zero
    /// for the examples (whose index is the plain covariate sum).
    pub fn beta(&self) -> &Array1<f64> {
        &self.beta
    }

    /// Covariates for `rows` observations.
    pub fn covariates(&self, rows: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
        let q = self.model.q();
        match self.model.variant {
            ModelVariant::M51 => self.correlated(rows, rng, |r| r.sample(StandardNormal)),
            ModelVariant::M53 => self.correlated(rows, rng, |r| r.sample::<f64, _>(Exp1) - 1.0),
            ModelVariant::M54 => {
                let pois = Poisson::new(1.0).expect("valid rate");
                self.correlated(rows, rng, |r| pois.sample(r) - 1.0)
            }
            ModelVariant::M52 => {
                let pois = Poisson::new(1.0).expect("valid rate");
                Array2::from_shape_simple_fn((rows, q), || pois.sample(rng))
            }
            ModelVariant::Ex1 | ModelVariant::Ex2 | ModelVariant::CausalSynth => {
                Array2::from_shape_simple_fn((rows, q), || rng.sample(StandardNormal))
            }
        }
    }

    /// `C1^{1/2} Z + 1` row by row for iid standardized `Z`.
    fn correlated(&self, rows: usize, rng: &mut ChaCha8Rng, mut z: impl FnMut(&mut ChaCha8Rng) -> f64) -> Array2<f64> {
        let q = self.model.q();
        let root = self.root.as_ref().expect("correlated design has a root");
        let raw = Array2::from_shape_simple_fn((rows, q), || z(rng));
        raw.dot(root) + 1.0
    }

    /// Responses for the non-treatment models given covariates.
    pub(crate) fn responses(&self, x: &Array2<f64>, rng: &mut ChaCha8Rng) -> Array1<f64> {
        let a = self.model.a;
        let mut y = Array1::zeros(x.nrows());
        for (yi, row) in y.iter_mut().zip(x.axis_iter(Axis(0))) {
            let noise: f64 = rng.sample(StandardNormal);
            *yi = match self.model.variant {
                ModelVariant::M51 | ModelVariant::M53 => row.dot(&self.beta) + noise,
                ModelVariant::M52 | ModelVariant::M54 => {
                    let u = row.dot(&self.beta);
                    0.1 * u * u + u + noise
                }
                ModelVariant::Ex1 => {
                    let s = row.sum();
                    let quad = row.dot(&row);
                    s + (a * quad + s) * noise
                }
                ModelVariant::Ex2 => {
                    let s = row.sum();
                    a * ex2_link(s) + s + noise
                }
                ModelVariant::CausalSynth => unreachable!("treatment design draws its own outcomes"),
            };
        }
        y
    }

    /// Draws one replication from `rng`: all labeled-then-unlabeled
    /// covariates first, then treatments (treatment design), then noise.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Dataset> {
        let (n, m) = (self.model.n, self.model.m);
        let x = self.covariates(n + m, rng);
        let xl = x.slice(ndarray::s![..n, ..]).to_owned();
        let xu = x.slice(ndarray::s![n.., ..]).to_owned();
        if !self.model.variant.is_causal() {
            let y = self.responses(&xl, rng);
            return Ok(Dataset::Ssl {
                labeled: LabeledSetF64::new(y, xl)?,
                unlabeled: UnlabeledSetF64::new(xu)?,
            });
        }
        let d: Vec<bool> = x
            .axis_iter(Axis(0))
            .map(|row| rng.random::<f64>() < sigmoid(causal_logit(row.iter().copied())))
            .collect();
        let mut y = Array1::zeros(n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (mu1, mu0) = causal_outcome_means(xl.row(i).dot(&self.beta));
            let noise: f64 = rng.sample(StandardNormal);
            *yi = if d[i] { mu1 } else { mu0 } + noise;
        }
        Ok(Dataset::Causal {
            labeled: CausalLabeledSetF64::new(y, d[..n].to_vec(), xl)?,
            unlabeled: CausalUnlabeledSetF64::new(d[n..].to_vec(), xu)?,
        })
    }

    /// Replication `rep`, deterministic in `(model.seed, rep)`.
    pub fn sample(&self, rep: u64) -> Result<Dataset> {
        self.draw(&mut rep_rng(self.model.seed, rep))
    }
}

/// Generates replication `rep` of `model` together with its truth.
pub fn generate(model: &SimModel, rep: u64) -> Result<(Dataset, TruthValues)> {
    let g = Generator::new(model)?;
    Ok((g.sample(rep)?, g.truth()))
}
