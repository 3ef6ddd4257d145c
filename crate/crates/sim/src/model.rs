//! Simulation model descriptions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Data-generating process.
///
/// `M51`..`M54` are the four high-dimensional designs (linear Gaussian,
/// quadratic Poisson, linear centered-exponential, quadratic
/// centered-Poisson). `Ex1` and `Ex2` are the low-dimensional heteroscedastic
/// and nonlinear examples indexed by the deviation size `a`. `CausalSynth` is
/// a harness-defined treatment design with a known effect of 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelVariant {
    M51,
    M52,
    M53,
    M54,
    Ex1,
    Ex2,
    CausalSynth,
}

impl ModelVariant {
    pub const ALL: [ModelVariant; 7] = [
        ModelVariant::M51,
        ModelVariant::M52,
        ModelVariant::M53,
        ModelVariant::M54,
        ModelVariant::Ex1,
        ModelVariant::Ex2,
        ModelVariant::CausalSynth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelVariant::M51 => "m51",
            ModelVariant::M52 => "m52",
            ModelVariant::M53 => "m53",
            ModelVariant::M54 => "m54",
            ModelVariant::Ex1 => "ex1",
            ModelVariant::Ex2 => "ex2",
            ModelVariant::CausalSynth => "causal_synth",
        }
    }

    /// Whether covariates are drawn through the correlated `C1` design.
    pub fn uses_c1(self) -> bool {
        matches!(self, ModelVariant::M51 | ModelVariant::M53 | ModelVariant::M54)
    }

    pub fn is_causal(self) -> bool {
        self == ModelVariant::CausalSynth
    }

    pub fn is_example(self) -> bool {
        matches!(self, ModelVariant::Ex1 | ModelVariant::Ex2)
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelVariant {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        ModelVariant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| SimError::invalid(format!("unknown model {s:?}")))
    }
}

/// One simulation configuration. `p` counts the intercept, so there are
/// `p - 1` covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimModel {
    pub variant: ModelVariant,
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub s0: usize,
    /// Deviation from linearity for the examples; ignored elsewhere.
    pub a: f64,
    pub seed: u64,
}

impl SimModel {
    pub fn new(variant: ModelVariant, n: usize, m: usize, p: usize, s0: usize) -> Self {
        Self {
            variant,
            n,
            m,
            p,
            s0,
            a: 0.0,
            seed: 0,
        }
    }

    /// The sizes used for each variant in the reference study.
    pub fn reference(variant: ModelVariant) -> Self {
        match variant {
            ModelVariant::M51 | ModelVariant::M52 => Self::new(variant, 100, 1000, 500, 1),
            ModelVariant::M53 | ModelVariant::M54 => Self::new(variant, 48, 96, 50, 3),
            ModelVariant::Ex1 | ModelVariant::Ex2 => Self::new(variant, 100, 1000, 2, 1),
            ModelVariant::CausalSynth => Self::new(variant, 300, 3000, 100, 3),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    /// Number of raw covariates, `p - 1`.
    pub fn q(&self) -> usize {
        self.p.saturating_sub(1)
    }

    pub fn validate(&self) -> Result<()> {
        let min_p = if self.variant.uses_c1() || self.variant.is_causal() { 3 } else { 2 };
        if self.p < min_p {
            return Err(SimError::invalid(format!(
                "p = {} too small for {} (need at least {min_p})",
                self.p, self.variant
            )));
        }
        if self.s0 == 0 || self.s0 > self.q() {
            return Err(SimError::invalid(format!("s0 = {} not in 1..={}", self.s0, self.q())));
        }
        let min_n = if self.variant.is_causal() { 4 } else { 2 };
        if self.n < min_n {
            return Err(SimError::invalid(format!("n = {} below {min_n}", self.n)));
        }
        if self.m == 0 {
            return Err(SimError::invalid("m must be positive"));
        }
        if !self.a.is_finite() {
            return Err(SimError::invalid(format!("a = {} is not finite", self.a)));
        }
        Ok(())
    }
}
