use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiment::run_experiment;
use crate::error::{Error, Result};

/// The parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    N,
    K,
    M,
    #[serde(rename = "T")]
    Horizon,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "n" => Ok(SweepParam::N),
            "k" => Ok(SweepParam::K),
            "m" => Ok(SweepParam::M),
            "T" | "t" => Ok(SweepParam::Horizon),
            _ => Err(Error::InvalidParameter(format!(
                "cannot vary '{s}' (expected n, k, m or T)"
            ))),
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::N => "n",
            SweepParam::K => "k",
            SweepParam::M => "m",
            SweepParam::Horizon => "T",
        })
    }
}

/// Final-regret statistics of one algorithm at one grid point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: String,
    pub value: u64,
    pub algorithm: String,
    pub reps: usize,
    pub mean_final_regret: f64,
    pub std_final_regret: f64,
}

impl SweepParam {
    pub fn apply(self, config: &ExperimentConfig, value: u64) -> Result<ExperimentConfig> {
        let mut c = config.clone();
        let as_usize = || usize::try_from(value).map_err(|_| Error::Overflow(format!("{self} = {value}")));
        match self {
            SweepParam::N => c.n = as_usize()?,
            SweepParam::K => c.k = as_usize()?,
            SweepParam::M => c.m = as_usize()?,
            SweepParam::Horizon => c.horizon = value,
        }
        c.validate()?;
        Ok(c)
    }
}

/// Runs one experiment per value. Each grid point reuses the base seed, so
/// the grid points share their random streams.
pub fn run_sweep(config: &ExperimentConfig, param: SweepParam, values: &[u64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for &value in values {
        let c = param.apply(config, value)?;
        let res = run_experiment(&c)?;
        for a in &res.summary.algorithms {
            rows.push(SweepRow {
                param: param.to_string(),
                value,
                algorithm: a.algorithm.clone(),
                reps: a.reps,
                mean_final_regret: a.final_mean,
                std_final_regret: a.final_std,
            });
        }
    }
    Ok(rows)
}

/// Columns: param, value, algorithm, reps, mean_final_regret, std_final_regret.
pub fn write_sweep_csv(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(err)?;
    for row in rows {
        w.serialize(row).map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
