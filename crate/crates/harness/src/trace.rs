//! Trace files: one CSV per run with a header line and one row per
//! generation, plus a `summary.json` sidecar describing the whole experiment.
//!
//! Column order is fixed:
//! `t, evals, restart_index, pair_count, f_m, best_f, best_f_so_far, sigma,
//! cond_c, fitness_std, distance`. `distance` is empty when the optimum is
//! unknown.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use hees::GenerationRecord;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};

pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: u64,
    pub evals: u64,
    pub restart_index: usize,
    pub pair_count: usize,
    pub f_m: f64,
    pub best_f: f64,
    pub best_f_so_far: f64,
    pub sigma: f64,
    pub cond_c: f64,
    pub fitness_std: f64,
    pub distance: Option<f64>,
}

impl From<&GenerationRecord> for TraceRow {
    fn from(r: &GenerationRecord) -> Self {
        Self {
            t: r.t,
            evals: r.evals,
            restart_index: r.restart_index,
            pair_count: r.pair_count,
            f_m: r.f_m,
            best_f: r.best_f,
            best_f_so_far: r.best_f_so_far,
            sigma: r.sigma,
            cond_c: r.cond_c,
            fitness_std: r.fitness_std,
            distance: r.distance,
        }
    }
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run: usize,
    pub seed: u64,
    pub trace_file: String,
    pub termination: String,
    pub failure: Option<String>,
    pub evals_used: u64,
    pub generations: usize,
    pub restarts: usize,
    pub best_f: f64,
    /// Evaluations until `best_f_so_far` first reached each configured
    /// target; `None` when it never did.
    pub evals_to_target: Vec<Option<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    /// Optimal value the precisions are measured from (0 when unknown).
    pub f_reference: f64,
    pub runs: Vec<RunSummary>,
}

pub fn trace_file_name(run: usize) -> String {
    format!("run_{run:03}.csv")
}

/// Absolute value thresholds for the given precisions.
pub fn absolute_targets(f_reference: f64, precisions: &[f64]) -> Vec<f64> {
    precisions.iter().map(|p| f_reference + p).collect()
}

/// Evaluation count of the first row whose `best_f_so_far` is at or below
/// each threshold.
pub fn evals_to_targets(rows: &[TraceRow], thresholds: &[f64]) -> Vec<Option<u64>> {
    thresholds
        .iter()
        .map(|&target| rows.iter().find(|r| r.best_f_so_far <= target).map(|r| r.evals))
        .collect()
}

pub fn write_trace<W: Write>(writer: W, rows: &[TraceRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        w.write_record([
            "t", "evals", "restart_index", "pair_count", "f_m", "best_f", "best_f_so_far", "sigma", "cond_c",
            "fitness_std", "distance",
        ])?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace_file(path: &Path, rows: &[TraceRow]) -> Result<()> {
    let file = File::create(path).map_err(|source| HarnessError::Io { path: path.to_owned(), source })?;
    write_trace(BufWriter::new(file), rows).map_err(|source| HarnessError::Csv { path: path.to_owned(), source })
}

pub fn read_trace_file(path: &Path) -> Result<Vec<TraceRow>> {
    let csv_err = |source| HarnessError::Csv { path: path.to_owned(), source };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    reader.deserialize().collect::<csv::Result<Vec<TraceRow>>>().map_err(csv_err)
}

pub fn write_summary(dir: &Path, summary: &ExperimentSummary) -> Result<()> {
    let path = dir.join(SUMMARY_FILE);
    let file = File::create(&path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, summary).map_err(|source| HarnessError::Json { path: path.clone(), source })?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(|source| HarnessError::Io { path, source })
}

pub fn read_summary(dir: &Path) -> Result<ExperimentSummary> {
    let path = dir.join(SUMMARY_FILE);
    let file = File::open(&path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
    serde_json::from_reader(BufReader::new(file)).map_err(|source| HarnessError::Json { path, source })
}

/// Summary and all traces of an experiment directory, traces in run order.
pub fn read_experiment(dir: &Path) -> Result<(ExperimentSummary, Vec<Vec<TraceRow>>)> {
    let summary = read_summary(dir)?;
    let traces = summary
        .runs
        .iter()
        .map(|r| read_trace_file(&dir.join(&r.trace_file)))
        .collect::<Result<Vec<_>>>()?;
    Ok((summary, traces))
}

pub(crate) fn ensure_dir(dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.to_owned(), source })?;
    Ok(dir.to_owned())
}
