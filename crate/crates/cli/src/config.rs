//! Run configuration from a strict JSON file plus command-line overrides.

use std::path::Path;

use anyhow::{Context, Result};
use clap::Args;
use ssinfer::{Penalty, RunConfig, TrimBounds, Variant};

/// Overrides shared by the estimation and simulation commands.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON configuration file; flags below take precedence over it.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    /// Number of cross-fitting folds.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of independent fold partitions averaged by the mean estimator.
    #[arg(long = "t")]
    pub t_partitions: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Outcome learner: lasso, sqrt_lasso, ridge, ols or zero.
    #[arg(long, value_parser = parse_variant)]
    pub learner: Option<Variant>,
    /// Penalty level: a number, "cv" or "auto".
    #[arg(long, value_parser = parse_penalty)]
    pub lambda: Option<Penalty<f64>>,
    /// Propensity clipping bounds as "lo,hi".
    #[arg(long, value_parser = parse_trim)]
    pub trim: Option<TrimBounds>,
}

fn parse_variant(s: &str) -> std::result::Result<Variant, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        format!("unknown learner {s:?}; expected lasso, sqrt_lasso, ridge, ols or zero")
    })
}

fn parse_penalty(s: &str) -> std::result::Result<Penalty<f64>, String> {
    match s {
        "cv" => Ok(Penalty::CrossValidated),
        "auto" => Ok(Penalty::Auto),
        v => v
            .parse()
            .map(Penalty::Fixed)
            .map_err(|_| format!("lambda must be a number, \"cv\" or \"auto\", got {v:?}")),
    }
}

fn parse_trim(s: &str) -> std::result::Result<TrimBounds, String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [lo, hi] = parts.as_slice() else {
        return Err(format!("trim must be \"lo,hi\", got {s:?}"));
    };
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad trim lower bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad trim upper bound {hi:?}"))?;
    TrimBounds::new(lo, hi).map_err(|e| e.to_string())
}

/// Reads a configuration file. An empty file yields the defaults; unknown
/// keys are rejected.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg: RunConfig = if text.trim().is_empty() {
        RunConfig::default()
    } else {
        serde_json::from_str(&text).with_context(|| format!("config {}", path.display()))?
    };
    cfg.validate().with_context(|| format!("config {}", path.display()))?;
    Ok(cfg)
}

impl Overrides {
    /// The file configuration (or defaults) with flags applied, validated.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(k) = self.k {
            cfg.k = k;
        }
        if let Some(t) = self.t_partitions {
            cfg.t_partitions = t;
        }
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(v) = self.learner {
            cfg.learner.variant = v;
        }
        if let Some(l) = self.lambda {
            cfg.learner.lambda = l;
        }
        if let Some(t) = self.trim {
            cfg.trim = t;
        }
        cfg.validate().context("invalid configuration")?;
        Ok(cfg)
    }
}
