//! CSV datasets.
//!
//! Every file has a header row. Labeled files put the response first (and
//! the treatment indicator second for treatment data); all remaining columns
//! are covariates. Unlabeled files hold the covariates (after the treatment
//! indicator for treatment data). Values are written in the shortest
//! decimal form that parses back to the same `f64`.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ssinfer::{CausalLabeledSetF64, CausalUnlabeledSetF64, LabeledSetF64, UnlabeledSetF64};

/// A numeric CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub values: Array2<f64>,
}

fn parse_cell(cell: &str, line: u64, col: usize, name: &str) -> Result<f64> {
    let v: f64 = cell
        .parse()
        .map_err(|_| anyhow!("line {line}, column {} ({name}): cannot parse {cell:?} as a number", col + 1))?;
    if !v.is_finite() {
        bail!("line {line}, column {} ({name}): value {cell:?} is not finite", col + 1);
    }
    Ok(v)
}

/// Reads a headed numeric CSV. Errors carry 1-based line and column numbers.
pub fn read_table(path: &Path) -> Result<Table> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()
        .with_context(|| format!("{}: cannot read header", path.display()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        bail!("{}: missing header row", path.display());
    }
    if header.iter().all(|h| h.parse::<f64>().is_ok()) {
        bail!("{}: missing header row (line 1 is numeric)", path.display());
    }
    let width = header.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.with_context(|| format!("{}: malformed CSV", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            bail!(
                "{}: line {line}: expected {width} fields as in the header, found {}",
                path.display(),
                record.len()
            );
        }
        for (col, cell) in record.iter().enumerate() {
            data.push(parse_cell(cell, line, col, &header[col]).with_context(|| path.display().to_string())?);
        }
        rows += 1;
    }
    if rows == 0 {
        bail!("{}: no data rows", path.display());
    }
    Ok(Table {
        header,
        values: Array2::from_shape_vec((rows, width), data).expect("row-major table"),
    })
}

fn indicator(column: ArrayView1<'_, f64>, name: &str, path: &Path, col: usize) -> Result<Vec<bool>> {
    column
        .iter()
        .enumerate()
        .map(|(i, &v)| match v {
            0.0 => Ok(false),
            1.0 => Ok(true),
            _ => Err(anyhow!(
                "{}: line {}, column {} ({name}): treatment must be 0 or 1, found {v}",
                path.display(),
                i + 2,
                col + 1
            )),
        })
        .collect()
}

fn need_columns(t: &Table, min: usize, what: &str, path: &Path) -> Result<()> {
    if t.header.len() < min {
        bail!("{}: {what} needs at least {min} columns, found {}", path.display(), t.header.len());
    }
    Ok(())
}

fn check_widths(labeled: usize, unlabeled: usize) -> Result<()> {
    if labeled != unlabeled {
        bail!("column mismatch: labeled data has {labeled} covariates but unlabeled data has {unlabeled}");
    }
    Ok(())
}

pub fn load_labeled(path: &Path) -> Result<LabeledSetF64> {
    let t = read_table(path)?;
    need_columns(&t, 2, "labeled data (response, covariates)", path)?;
    let y = t.values.column(0).to_owned();
    let x = t.values.slice(ndarray::s![.., 1..]).to_owned();
    Ok(LabeledSetF64::new(y, x)?)
}

pub fn load_unlabeled(path: &Path) -> Result<UnlabeledSetF64> {
    let t = read_table(path)?;
    Ok(UnlabeledSetF64::new(t.values)?)
}

pub fn load_ssl(labeled: &Path, unlabeled: &Path) -> Result<(LabeledSetF64, UnlabeledSetF64)> {
    let l = load_labeled(labeled)?;
    let u = load_unlabeled(unlabeled)?;
    check_widths(l.n_covariates(), u.n_covariates())?;
    Ok((l, u))
}

pub fn load_causal(labeled: &Path, unlabeled: &Path) -> Result<(CausalLabeledSetF64, CausalUnlabeledSetF64)> {
    let t = read_table(labeled)?;
    need_columns(&t, 3, "treatment data (response, treatment, covariates)", labeled)?;
    let d = indicator(t.values.column(1), &t.header[1], labeled, 1)?;
    let l = CausalLabeledSetF64::new(
        t.values.column(0).to_owned(),
        d,
        t.values.slice(ndarray::s![.., 2..]).to_owned(),
    )
    .with_context(|| labeled.display().to_string())?;
    let t = read_table(unlabeled)?;
    need_columns(&t, 2, "unlabeled treatment data (treatment, covariates)", unlabeled)?;
    let d = indicator(t.values.column(0), &t.header[0], unlabeled, 0)?;
    let u = CausalUnlabeledSetF64::new(d, t.values.slice(ndarray::s![.., 1..]).to_owned())
        .with_context(|| unlabeled.display().to_string())?;
    check_widths(l.n_covariates(), u.n_covariates())?;
    Ok((l, u))
}

fn covariate_names(q: usize) -> impl Iterator<Item = String> {
    (1..=q).map(|j| format!("x{j}"))
}

fn write_rows(path: &Path, header: Vec<String>, lead: &[Array1<f64>], x: ArrayView2<'_, f64>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    writeln!(out, "{}", header.join(","))?;
    for i in 0..x.nrows() {
        let cells: Vec<String> = lead
            .iter()
            .map(|c| c[i])
            .chain(x.row(i).iter().copied())
            .map(|v| v.to_string())
            .collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn as_column(d: &[bool]) -> Array1<f64> {
    d.iter().map(|&t| f64::from(u8::from(t))).collect()
}

pub fn write_labeled(path: &Path, set: &LabeledSetF64) -> Result<()> {
    let header = std::iter::once("y".to_string()).chain(covariate_names(set.n_covariates())).collect();
    write_rows(path, header, &[set.responses().to_owned()], set.covariates())
}

pub fn write_unlabeled(path: &Path, set: &UnlabeledSetF64) -> Result<()> {
    write_rows(path, covariate_names(set.n_covariates()).collect(), &[], set.covariates())
}

pub fn write_causal_labeled(path: &Path, set: &CausalLabeledSetF64) -> Result<()> {
    let header = ["y".to_string(), "d".to_string()].into_iter().chain(covariate_names(set.n_covariates())).collect();
    write_rows(path, header, &[set.responses().to_owned(), as_column(set.treatments())], set.covariates())
}

pub fn write_causal_unlabeled(path: &Path, set: &CausalUnlabeledSetF64) -> Result<()> {
    let header = std::iter::once("d".to_string()).chain(covariate_names(set.n_covariates())).collect();
    write_rows(path, header, &[as_column(set.treatments())], set.covariates())
}
