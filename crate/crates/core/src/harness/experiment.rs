use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, InstanceSource};
use crate::algorithms::{BanditEnv, Policy, RegretTrace};
use crate::error::{Error, Result};
use crate::scm::{generate_random_instance, Instance};

/// `base_seed` xor the first eight bytes of SHA-256 over the labels.
pub fn derive_seed(base_seed: u64, labels: &[&str]) -> u64 {
    let mut h = Sha256::new();
    for label in labels {
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
    }
    let digest = h.finalize();
    let mut first = [0u8; 8];
    first.copy_from_slice(&digest[..8]);
    base_seed ^ u64::from_le_bytes(first)
}

pub fn instance_seed(base_seed: u64, rep: usize) -> u64 {
    derive_seed(base_seed, &[&rep.to_string(), "inst"])
}

pub fn run_seed(base_seed: u64, rep: usize, policy: Policy) -> u64 {
    derive_seed(base_seed, &[&rep.to_string(), policy.key(), "run"])
}

/// One policy's outcome in one repetition.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub rep: usize,
    pub policy: Policy,
    pub trace: RegretTrace,
}

/// A run that could not be completed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunFailure {
    pub rep: usize,
    pub algorithm: String,
    pub message: String,
}

/// Per-round mean and population standard deviation of cumulative regret.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub algorithm: String,
    #[serde(skip)]
    pub policy: Policy,
    pub reps: usize,
    #[serde(skip)]
    pub mean: Vec<f64>,
    #[serde(skip)]
    pub std: Vec<f64>,
    pub final_mean: f64,
    pub final_std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryStats {
    pub algorithms: Vec<AlgorithmSummary>,
    pub failures: Vec<RunFailure>,
    /// Policies dropped before running, with the reason.
    pub skipped: Vec<(String, String)>,
    /// Set when any run failed.
    pub partial: bool,
}

impl SummaryStats {
    pub fn get(&self, policy: Policy) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|a| a.policy == policy)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// Completed runs ordered by repetition, then by requested policy order.
    pub runs: Vec<RunRecord>,
    pub summary: SummaryStats,
}

/// Policies that actually run, and those dropped with a reason.
fn active_policies(config: &ExperimentConfig, k: usize) -> (Vec<Policy>, Vec<(String, String)>) {
    let mut active = Vec::new();
    let mut skipped = Vec::new();
    for &p in &config.algorithms {
        if active.contains(&p) {
            continue;
        }
        if p == Policy::Raps && k > 1 && !config.force_raps {
            skipped.push((p.name().to_string(), format!("k = {k} > 1; pass force_raps to run it")));
        } else {
            active.push(p);
        }
    }
    (active, skipped)
}

fn draw_instance(config: &ExperimentConfig, seed: u64) -> Result<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_random_instance(&config.generator(), &mut rng)
}

/// Seed of the instance used by `policy` in `rep`.
fn env_seed(config: &ExperimentConfig, rep: usize, policy: Policy) -> u64 {
    match (&config.instance, config.paired) {
        (InstanceSource::Fixed, _) => derive_seed(config.base_seed, &["fixed", "inst"]),
        (_, true) => instance_seed(config.base_seed, rep),
        (_, false) => derive_seed(config.base_seed, &[&rep.to_string(), policy.key(), "inst"]),
    }
}

fn run_rep(
    config: &ExperimentConfig,
    loaded: Option<&Instance>,
    policies: &[Policy],
    rep: usize,
) -> (Vec<RunRecord>, Vec<RunFailure>) {
    let opts = config.run_options();
    let mut records = Vec::new();
    let mut failures = Vec::new();
    let mut env_cache: Option<(u64, Result<BanditEnv>)> = None;
    for &policy in policies {
        let seed = env_seed(config, rep, policy);
        if env_cache.as_ref().is_none_or(|(s, _)| *s != seed) {
            let inst = match loaded {
                Some(i) => Ok(i.clone()),
                None => draw_instance(config, seed),
            };
            env_cache = Some((seed, inst.and_then(|i| BanditEnv::new(i, config.m))));
        }
        let outcome = match &env_cache.as_ref().expect("just filled").1 {
            Ok(env) => {
                let mut rng = ChaCha8Rng::seed_from_u64(run_seed(config.base_seed, rep, policy));
                policy.run(env, config.horizon, &opts, &mut rng)
            }
            Err(e) => Err(Error::InvalidInstance(e.to_string())),
        };
        match outcome {
            Ok(trace) => records.push(RunRecord { rep, policy, trace }),
            Err(e) => failures.push(RunFailure {
                rep,
                algorithm: policy.name().to_string(),
                message: e.to_string(),
            }),
        }
    }
    (records, failures)
}

/// Runs every repetition, in parallel when possible. The result does not
/// depend on the worker count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let loaded = match &config.instance {
        InstanceSource::Path(p) => {
            let inst = Instance::load(p)?;
            if inst.n() != config.n || inst.cardinality() != config.l || inst.reward_parent_count() != config.k {
                return Err(Error::InvalidParameter(format!(
                    "instance file has n = {}, l = {}, k = {} but the config says n = {}, l = {}, k = {}",
                    inst.n(),
                    inst.cardinality(),
                    inst.reward_parent_count(),
                    config.n,
                    config.l,
                    config.k
                )));
            }
            Some(inst)
        }
        _ => None,
    };
    let (policies, skipped) = active_policies(config, config.k);
    let work = || {
        (0..config.reps)
            .into_par_iter()
            .map(|rep| run_rep(config, loaded.as_ref(), &policies, rep))
            .collect::<Vec<_>>()
    };
    let per_rep = match config.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (r, f) in per_rep {
        runs.extend(r);
        failures.extend(f);
    }
    let summary = summarize(&policies, &runs, failures, skipped);
    Ok(ExperimentResult {
        config: config.clone(),
        runs,
        summary,
    })
}

/// Mean and population standard deviation of `values`.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregates completed runs per policy, in the given policy order.
pub fn summarize(
    policies: &[Policy],
    runs: &[RunRecord],
    failures: Vec<RunFailure>,
    skipped: Vec<(String, String)>,
) -> SummaryStats {
    let algorithms = policies
        .iter()
        .map(|&policy| {
            let traces: Vec<&RegretTrace> = runs.iter().filter(|r| r.policy == policy).map(|r| &r.trace).collect();
            let horizon = traces.first().map_or(0, |t| t.len());
            let mut column = vec![0.0; traces.len()];
            let (mut mean, mut std) = (Vec::with_capacity(horizon), Vec::with_capacity(horizon));
            for t in 0..horizon {
                for (c, tr) in column.iter_mut().zip(&traces) {
                    *c = tr.cumulative[t];
                }
                let (mu, sd) = mean_std(&column);
                mean.push(mu);
                std.push(sd);
            }
            let finals: Vec<f64> = traces.iter().map(|t| t.final_regret()).collect();
            let (final_mean, final_std) = mean_std(&finals);
            AlgorithmSummary {
                algorithm: policy.name().to_string(),
                policy,
                reps: traces.len(),
                mean,
                std,
                final_mean,
                final_std,
            }
        })
        .collect();
    SummaryStats {
        algorithms,
        partial: !failures.is_empty(),
        failures,
        skipped,
    }
}
