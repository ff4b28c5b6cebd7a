//! CSV readers and writers for datasets, chains, predictions and tables.
//!
//! Floats are written with 17 significant digits so that a value survives a
//! round trip exactly and repeated runs produce byte-identical files.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::design::CandidateScores;
use crate::error::{Error, Result};
use crate::kernels::{FamilyKind, KernelSpec};
use crate::mcmc::Chain;
use crate::metrics::{ComparisonSummary, SixNumber};
use crate::predict::MixturePrediction;

/// Scientific notation with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn format_err(file: &Path, message: impl Into<String>) -> Error {
    Error::Format {
        file: file.display().to_string(),
        message: message.into(),
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| format_err(path, e.to_string()))
}

/// Header and numeric rows of a CSV file.
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_table_from<R: Read>(reader: R, file: &Path) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| format_err(file, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(format_err(file, "missing header row"));
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format_err(file, e.to_string()))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, s)| {
                s.parse::<f64>().map_err(|_| {
                    format_err(file, format!("row {}, column `{}`: `{s}` is not a number", i + 1, headers[j]))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(format_err(file, format!("row {} has a non-finite value", i + 1)));
        }
        rows.push(row);
    }
    Ok(Table { headers, rows })
}

pub fn read_table(path: &Path) -> Result<Table> {
    read_table_from(open(path)?, path)
}

fn matrix_of(rows: &[Vec<f64>], cols: std::ops::Range<usize>) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| rows[i][cols.start + j])
}

/// A dataset file: inputs in every column but the last, response last.
pub fn read_dataset(path: &Path) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let t = read_table(path)?;
    let p = t.headers.len();
    if p < 2 {
        return Err(format_err(path, "need at least one input column and a response column"));
    }
    if t.rows.is_empty() {
        return Err(format_err(path, "no data rows"));
    }
    let x = matrix_of(&t.rows, 0..p - 1);
    let y = DVector::from_iterator(t.rows.len(), t.rows.iter().map(|r| r[p - 1]));
    Ok((x, y))
}

pub fn write_dataset(path: &Path, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=x.ncols()).map(|j| format!("x{j}")).collect();
    header.push("y".into());
    w.write_record(&header)?;
    for i in 0..x.nrows() {
        let mut rec: Vec<String> = x.row(i).iter().map(|v| fmt_f64(*v)).collect();
        rec.push(fmt_f64(y[i]));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// A matrix of points, one per row; every column is an input.
pub fn read_points(path: &Path) -> Result<DMatrix<f64>> {
    let t = read_table(path)?;
    if t.rows.is_empty() {
        return Err(format_err(path, "no rows"));
    }
    Ok(matrix_of(&t.rows, 0..t.headers.len()))
}

pub fn write_points(path: &Path, x: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record((1..=x.ncols()).map(|j| format!("x_{j}")))?;
    for i in 0..x.nrows() {
        w.write_record(x.row(i).iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

fn param_headers(kind: FamilyKind, p: usize) -> Vec<String> {
    match kind {
        FamilyKind::Sim => (1..=p).map(|j| format!("beta_{j}")).collect(),
        FamilyKind::Separable => (1..=p).map(|j| format!("theta_{j}")).collect(),
        FamilyKind::Isotropic => vec!["theta".into()],
    }
}

/// Writes `iter, params…, eta, log_post`, plus a `flipped` column of 0/1
/// when flips are given.
pub fn write_chain_to<W: Write>(out: W, chain: &Chain, flips: Option<&[bool]>) -> Result<()> {
    if let Some(f) = flips {
        if f.len() != chain.len() {
            return Err(Error::dim("flip indicators", chain.len(), f.len()));
        }
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["iter".to_string()];
    header.extend(param_headers(chain.kind, chain.dim));
    header.push("eta".into());
    header.push("log_post".into());
    if flips.is_some() {
        header.push("flipped".into());
    }
    w.write_record(&header)?;
    for (t, spec) in chain.samples.iter().enumerate() {
        let mut rec = vec![chain.iters[t].to_string()];
        rec.extend(spec.params().iter().map(|v| fmt_f64(*v)));
        rec.push(fmt_f64(spec.eta));
        rec.push(fmt_f64(chain.log_post[t]));
        if let Some(f) = flips {
            rec.push(u8::from(f[t]).to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_chain(path: &Path, chain: &Chain, flips: Option<&[bool]>) -> Result<()> {
    write_chain_to(File::create(path)?, chain, flips)
}

/// Reads a chain file; the family is inferred from the parameter columns.
pub fn read_chain_from<R: Read>(reader: R, file: &Path) -> Result<Chain> {
    let t = read_table_from(reader, file)?;
    let h = &t.headers;
    if h.first().map(String::as_str) != Some("iter") {
        return Err(format_err(file, "first column must be `iter`"));
    }
    let eta_col = h
        .iter()
        .position(|c| c == "eta")
        .ok_or_else(|| format_err(file, "no `eta` column"))?;
    if h.get(eta_col + 1).map(String::as_str) != Some("log_post") {
        return Err(format_err(file, "`log_post` must follow `eta`"));
    }
    let params = &h[1..eta_col];
    let kind = match params.first().map(String::as_str) {
        Some(s) if s.starts_with("beta_") => FamilyKind::Sim,
        Some("theta") if params.len() == 1 => FamilyKind::Isotropic,
        Some(s) if s.starts_with("theta_") => FamilyKind::Separable,
        _ => return Err(format_err(file, "unrecognised parameter columns")),
    };
    let expected = param_headers(kind, params.len());
    if params != expected.as_slice() {
        return Err(format_err(file, format!("expected parameter columns {expected:?}")));
    }
    let dim = if kind == FamilyKind::Isotropic { 0 } else { params.len() };
    let mut samples = Vec::with_capacity(t.rows.len());
    let mut log_post = Vec::with_capacity(t.rows.len());
    let mut iters = Vec::with_capacity(t.rows.len());
    for (i, r) in t.rows.iter().enumerate() {
        let it = r[0];
        if it < 0.0 || it.fract() != 0.0 {
            return Err(format_err(file, format!("row {}: iteration `{it}` is not a count", i + 1)));
        }
        iters.push(it as usize);
        let theta = r[1..eta_col].to_vec();
        let eta = r[eta_col];
        let spec = match kind {
            FamilyKind::Sim => KernelSpec::sim(theta, eta),
            FamilyKind::Separable => KernelSpec::separable(theta, eta),
            FamilyKind::Isotropic => KernelSpec::isotropic(theta[0], eta),
        }
        .map_err(|e| format_err(file, format!("row {}: {e}", i + 1)))?;
        samples.push(spec);
        log_post.push(r[eta_col + 1]);
    }
    let mut chain = Chain::from_samples(kind, dim, samples, log_post)?;
    chain.iters = iters;
    Ok(chain)
}

pub fn read_chain(path: &Path) -> Result<Chain> {
    read_chain_from(open(path)?, path)
}

/// One row per point: `x_1..x_p, mean, sd, q_lo, q_hi[, mean_index]`.
///
/// `order` lists the rows to write, e.g. sorted by mean index for link
/// plots.
pub fn write_predictions(
    path: &Path,
    xstar: &DMatrix<f64>,
    pred: &MixturePrediction,
    order: &[usize],
) -> Result<()> {
    if pred.probs.len() != 2 {
        return Err(Error::InvalidParameter("prediction table needs exactly two quantiles".into()));
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=xstar.ncols()).map(|j| format!("x_{j}")).collect();
    header.extend(["mean", "sd", "q_lo", "q_hi"].map(String::from));
    if pred.mean_index.is_some() {
        header.push("mean_index".into());
    }
    w.write_record(&header)?;
    for &i in order {
        let mut rec: Vec<String> = xstar.row(i).iter().map(|v| fmt_f64(*v)).collect();
        rec.push(fmt_f64(pred.mean[i]));
        rec.push(fmt_f64(pred.sd[i]));
        rec.push(fmt_f64(pred.quantiles[i][0]));
        rec.push(fmt_f64(pred.quantiles[i][1]));
        if let Some(mi) = &pred.mean_index {
            rec.push(fmt_f64(mi[i]));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `x_1..x_p, score, rank` with rank 1 the best candidate.
pub fn write_candidates(path: &Path, scores: &CandidateScores) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let p = scores.candidates.ncols();
    let mut header: Vec<String> = (1..=p).map(|j| format!("x_{j}")).collect();
    header.push("score".into());
    header.push("rank".into());
    w.write_record(&header)?;
    for r in 0..scores.scores.len() {
        let mut rec: Vec<String> = scores.candidates.row(r).iter().map(|v| fmt_f64(*v)).collect();
        rec.push(fmt_f64(scores.scores[r]));
        rec.push((r + 1).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Long form `method, replicate, sqrt_mah`; failed replicates are omitted.
pub fn write_results(path: &Path, summary: &ComparisonSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["method", "replicate", "sqrt_mah"])?;
    for (m, name) in summary.methods.iter().enumerate() {
        let failed = &summary.failures[m];
        let reps = (0..).filter(|r| !failed.contains(r));
        for (r, d) in reps.zip(&summary.distances[m]) {
            w.write_record([name.clone(), r.to_string(), fmt_f64(*d)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// The six-row summary, one column per method.
pub fn write_summary(path: &Path, summary: &ComparisonSummary) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["stat".to_string()];
    header.extend(summary.methods.iter().cloned());
    w.write_record(&header)?;
    let sums = summary.summary();
    for (r, label) in SixNumber::ROW_LABELS.iter().enumerate() {
        let mut rec = vec![label.to_string()];
        for s in &sums {
            rec.push(s.map_or_else(|| "NA".to_string(), |s| fmt_f64(s.rows()[r])));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// A table whose first column is an integer key (iteration, component)
/// followed by numeric columns. `header` names every column, key included.
pub fn write_keyed(path: &Path, header: &[&str], keys: &[usize], rows: &[Vec<f64>]) -> Result<()> {
    if keys.len() != rows.len() {
        return Err(Error::dim("table keys", rows.len(), keys.len()));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for (k, r) in keys.iter().zip(rows) {
        if r.len() + 1 != header.len() {
            return Err(Error::dim("table row", header.len(), r.len() + 1));
        }
        let mut rec = vec![k.to_string()];
        rec.extend(r.iter().map(|v| fmt_f64(*v)));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
