//! Subcommand bodies.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;
use ssinfer::{
    estimate_ate_tes, estimate_mean_multi, estimate_mean_variance, make_partition, moment_cache, sample_mean_ci,
    sample_variance_ci, Inference, LogisticLasso, RunConfig,
};
use ssinfer_sim::{
    generate, k_sweep, r_study as ratio_study, run_mc, sample_ate_interval, Dataset, EstimatorBundle, ModelVariant,
    SimModel, K_SWEEP_HEADER, R_STUDY_HEADER, TABLE_HEADER,
};

use crate::config::Overrides;
use crate::io;

#[derive(Serialize)]
struct Report<'a, E, B> {
    command: &'a str,
    config: &'a RunConfig,
    estimate: E,
    baseline: B,
}

/// Sends text to `path`, or to standard output when no path is given.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            let mut f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            f.write_all(text.as_bytes())?;
        }
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(path, &text)
}

fn ssl_report(
    command: &str,
    labeled: &Path,
    unlabeled: &Path,
    output: Option<&Path>,
    overrides: &Overrides,
) -> Result<()> {
    let cfg = overrides.resolve()?;
    let (l, u) = io::load_ssl(labeled, unlabeled)?;
    let cache = moment_cache(&u).context("computing unlabeled moments")?;
    let y = l.responses();
    if command == "mean" && cfg.t_partitions > 1 {
        let est = estimate_mean_multi(&l, &cache, cfg.t_partitions, cfg.k, &cfg.learner, cfg.alpha, cfg.seed)
            .context("estimating the mean")?;
        let base = sample_mean_ci(y, cfg.alpha).context("computing the sample mean")?;
        return emit_json(output, &Report { command, config: &cfg, estimate: est, baseline: base });
    }
    let part = make_partition(l.n(), cfg.k, cfg.seed).context("partitioning the labeled rows")?;
    let (mean, var) =
        estimate_mean_variance(&l, &cache, &part, &cfg.learner, cfg.alpha).with_context(|| format!("estimating the {command}"))?;
    if command == "mean" {
        let base = sample_mean_ci(y, cfg.alpha).context("computing the sample mean")?;
        emit_json(output, &Report { command, config: &cfg, estimate: mean, baseline: base })
    } else {
        let base = sample_variance_ci(y, cfg.alpha).context("computing the sample variance")?;
        emit_json(output, &Report { command, config: &cfg, estimate: var, baseline: base })
    }
}

pub fn mean(labeled: &Path, unlabeled: &Path, output: Option<&Path>, overrides: &Overrides) -> Result<()> {
    ssl_report("mean", labeled, unlabeled, output, overrides)
}

pub fn variance(labeled: &Path, unlabeled: &Path, output: Option<&Path>, overrides: &Overrides) -> Result<()> {
    ssl_report("variance", labeled, unlabeled, output, overrides)
}

fn causal_report(
    command: &str,
    labeled: &Path,
    unlabeled: &Path,
    output: Option<&Path>,
    overrides: &Overrides,
) -> Result<()> {
    let cfg = overrides.resolve()?;
    let (l, u) = io::load_causal(labeled, unlabeled)?;
    let part = make_partition(l.n(), cfg.k, cfg.seed).context("partitioning the labeled rows")?;
    let propensity = LogisticLasso { trim: cfg.trim, ..LogisticLasso::default() };
    let (ate, tes) = estimate_ate_tes(&l, &u, &part, &cfg.learner, &propensity, cfg.trim, cfg.alpha)
        .context("estimating the treatment effect")?;
    let b = sample_ate_interval(&l, cfg.alpha).context("computing the difference in means")?;
    let base = Inference { estimate: b.estimate, ci: (b.lo, b.hi), n: l.n(), alpha: cfg.alpha };
    if command == "ate" {
        emit_json(output, &Report { command, config: &cfg, estimate: ate, baseline: base })
    } else {
        emit_json(output, &Report { command, config: &cfg, estimate: tes, baseline: base })
    }
}

pub fn ate(labeled: &Path, unlabeled: &Path, output: Option<&Path>, overrides: &Overrides) -> Result<()> {
    causal_report("ate", labeled, unlabeled, output, overrides)
}

pub fn tes(labeled: &Path, unlabeled: &Path, output: Option<&Path>, overrides: &Overrides) -> Result<()> {
    causal_report("tes", labeled, unlabeled, output, overrides)
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// m51, m52, m53, m54, ex1, ex2 or causal_synth.
    #[arg(long, value_parser = crate::parse_model)]
    pub model: ModelVariant,
    /// Labeled sample size (default: the model's reference value).
    #[arg(long)]
    pub n: Option<usize>,
    /// Unlabeled sample size.
    #[arg(long)]
    pub m: Option<usize>,
    /// Dimension including the intercept.
    #[arg(long)]
    pub p: Option<usize>,
    /// Sparsity level.
    #[arg(long)]
    pub s0: Option<usize>,
    /// Nonlinearity level of the example models.
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, default_value_t = 500)]
    pub reps: usize,
    /// Row of the table to print: mean, variance or ate.
    #[arg(long)]
    pub target: Option<String>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the full JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Instead of the table, sweep these fold counts (comma separated) and
    /// print k,mse_base,mse_ss.
    #[arg(long, value_delimiter = ',')]
    pub k_sweep: Option<Vec<usize>>,
    /// Write the labeled and unlabeled CSVs of one replication into this
    /// directory and stop.
    #[arg(long)]
    pub emit_data: Option<PathBuf>,
    /// Replication written by `--emit-data`.
    #[arg(long, default_value_t = 0)]
    pub rep: u64,
    #[command(flatten)]
    pub overrides: Overrides,
}

impl SimulateArgs {
    fn model(&self, seed: u64) -> Result<SimModel> {
        let mut model = SimModel::reference(self.model).with_seed(seed);
        model.n = self.n.unwrap_or(model.n);
        model.m = self.m.unwrap_or(model.m);
        model.p = self.p.unwrap_or(model.p);
        model.s0 = self.s0.unwrap_or(model.s0);
        model.a = self.a.unwrap_or(model.a);
        model.validate().context("invalid model")?;
        Ok(model)
    }
}

fn emit_dataset(model: &SimModel, rep: u64, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let (data, _) = generate(model, rep)?;
    let (l, u) = (dir.join("labeled.csv"), dir.join("unlabeled.csv"));
    match data {
        Dataset::Ssl { labeled, unlabeled } => {
            io::write_labeled(&l, &labeled)?;
            io::write_unlabeled(&u, &unlabeled)
        }
        Dataset::Causal { labeled, unlabeled } => {
            io::write_causal_labeled(&l, &labeled)?;
            io::write_causal_unlabeled(&u, &unlabeled)
        }
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let cfg = args.overrides.resolve()?;
    let model = args.model(cfg.seed)?;
    if let Some(dir) = &args.emit_data {
        return emit_dataset(&model, args.rep, dir);
    }
    if let Some(ks) = &args.k_sweep {
        let points = k_sweep(&model, &cfg.learner, ks, args.reps, cfg.alpha).context("running the fold-count sweep")?;
        let mut text = format!("{K_SWEEP_HEADER}\n");
        for p in &points {
            text.push_str(&p.csv_row());
            text.push('\n');
        }
        return emit(args.output.as_deref(), &text);
    }
    let target = match (&args.target, model.variant.is_causal()) {
        (Some(t), _) => t.as_str(),
        (None, true) => "ate",
        (None, false) => "mean",
    };
    let bundle = EstimatorBundle {
        trim: cfg.trim,
        ..EstimatorBundle::with_outcome(cfg.learner.clone(), cfg.k)
    };
    let report = run_mc(&model, &bundle, args.reps, cfg.alpha).context("running the Monte Carlo study")?;
    let rows = report.table_rows();
    let Some((_, row)) = rows.iter().find(|(t, _)| *t == target) else {
        let known: Vec<&str> = rows.iter().map(|(t, _)| *t).collect();
        bail!("target {target:?} is not available for {}; expected one of {}", model.variant, known.join(", "));
    };
    if let Some(path) = &args.report {
        emit_json(Some(path), &report)?;
    }
    emit(args.output.as_deref(), &format!("{TABLE_HEADER}\n{row}\n"))
}

#[derive(Debug, Args)]
pub struct RStudyArgs {
    /// ex1 or ex2.
    #[arg(long, value_parser = crate::parse_model)]
    pub model: ModelVariant,
    /// Dimension including the intercept.
    #[arg(long, default_value_t = 2)]
    pub p: usize,
    /// Nonlinearity levels (comma separated).
    #[arg(long, value_delimiter = ',', required = true)]
    pub grid: Vec<f64>,
    /// Oracle draws per grid point.
    #[arg(long, default_value_t = 100_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

pub fn r_study(args: &RStudyArgs) -> Result<()> {
    let mut model = SimModel::reference(args.model).with_seed(args.seed);
    model.p = args.p;
    model.s0 = model.s0.min(args.p.saturating_sub(1)).max(1);
    model.validate().context("invalid model")?;
    let points = ratio_study(&model, &args.grid, args.draws).context("estimating the proportionality ratio")?;
    let mut text = format!("{R_STUDY_HEADER}\n");
    for p in &points {
        text.push_str(&p.csv_row());
        text.push('\n');
    }
    emit(args.output.as_deref(), &text)
}
