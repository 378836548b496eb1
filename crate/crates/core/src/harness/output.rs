use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiment::{ExperimentResult, RunRecord, SummaryStats};
use crate::error::{Error, Result};

pub const TRACES_FILE: &str = "traces.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const FINAL_FILE: &str = "final.csv";
pub const SIDECAR_FILE: &str = "config.json";

fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(BufWriter::new(file)))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn finish(mut w: csv::Writer<BufWriter<File>>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))?;
    let inner = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    inner
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?
        .sync_all()
        .map_err(|e| Error::io(path, e))
}

/// Columns: algorithm, rep, t, instantaneous_regret, cumulative_regret.
/// Rounds are numbered from 1.
pub fn write_traces_csv(runs: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let err = csv_err(path);
    let mut w = csv_writer(path)?;
    w.write_record(["algorithm", "rep", "t", "instantaneous_regret", "cumulative_regret"])
        .map_err(&err)?;
    for run in runs {
        let name = run.policy.name();
        let rep = run.rep.to_string();
        for (t, (inst, cum)) in run.trace.instantaneous.iter().zip(&run.trace.cumulative).enumerate() {
            w.write_record([name, &rep, &(t + 1).to_string(), &inst.to_string(), &cum.to_string()])
                .map_err(&err)?;
        }
    }
    finish(w, path)
}

/// Columns: algorithm, t, mean_cum_regret, std_cum_regret.
pub fn write_summary_csv(summary: &SummaryStats, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let err = csv_err(path);
    let mut w = csv_writer(path)?;
    w.write_record(["algorithm", "t", "mean_cum_regret", "std_cum_regret"])
        .map_err(&err)?;
    for a in &summary.algorithms {
        for (t, (mu, sd)) in a.mean.iter().zip(&a.std).enumerate() {
            w.write_record([
                a.algorithm.as_str(),
                &(t + 1).to_string(),
                &mu.to_string(),
                &sd.to_string(),
            ])
            .map_err(&err)?;
        }
    }
    finish(w, path)
}

/// Columns: algorithm, reps, mean_final_regret, std_final_regret.
pub fn write_final_csv(summary: &SummaryStats, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let err = csv_err(path);
    let mut w = csv_writer(path)?;
    w.write_record(["algorithm", "reps", "mean_final_regret", "std_final_regret"])
        .map_err(&err)?;
    for a in &summary.algorithms {
        w.write_record([
            a.algorithm.as_str(),
            &a.reps.to_string(),
            &a.final_mean.to_string(),
            &a.final_std.to_string(),
        ])
        .map_err(&err)?;
    }
    finish(w, path)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    version: &'a str,
    config: ExperimentConfig,
    summary: &'a SummaryStats,
}

/// The resolved config, the crate version and the run bookkeeping.
pub fn write_sidecar(result: &ExperimentResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let sidecar = Sidecar {
        version: env!("CARGO_PKG_VERSION"),
        config: result.config.resolved(),
        summary: &result.summary,
    };
    let text = serde_json::to_string_pretty(&sidecar).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(|e| Error::io(path, e))
}

/// Writes all artifacts into `dir`, creating it if needed, and returns the
/// paths written.
pub fn write_results(result: &ExperimentResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths: Vec<PathBuf> = [TRACES_FILE, SUMMARY_FILE, FINAL_FILE, SIDECAR_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect();
    write_traces_csv(&result.runs, &paths[0])?;
    write_summary_csv(&result.summary, &paths[1])?;
    write_final_csv(&result.summary, &paths[2])?;
    write_sidecar(result, &paths[3])?;
    Ok(paths)
}
