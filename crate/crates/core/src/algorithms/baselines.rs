//! Baselines: UCB1 over every arm, and a search-then-exploit procedure
//! that first identifies reward parents with atomic interventions.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{horizon_len, BanditEnv, MeanCache, RegretTrace, RunOptions};
use crate::bandit_core::{ArmStats, UcbState};
use crate::combinatorics::{action_count, config_unrank, unrank_action, Action};
use crate::error::{Error, Result};
use crate::scm::Instance;

/// UCB1 on `A_m`, or on every action of size at most `m` when
/// `opts.full_action_space` is set.
pub fn run_standard_ucb<R: Rng + ?Sized>(
    env: &BanditEnv,
    horizon: u64,
    opts: &RunOptions,
    rng: &mut R,
) -> Result<RegretTrace> {
    let len = horizon_len(horizon)?;
    let (n, l, m) = (env.n(), env.cardinality(), env.m());
    let mut actions = Vec::new();
    let mut means = Vec::new();
    let sizes = if opts.full_action_space { 0..=m } else { m..=m };
    for size in sizes {
        let count = action_count(n, size, l)?;
        for r in 0..count {
            if size == m {
                actions.push(env.action(r)?);
                means.push(env.mean_of_rank(r)?);
            } else {
                let a = unrank_action(r, n, size, l)?;
                means.push(env.mean_of(&a)?);
                actions.push(a);
            }
        }
    }
    let best = env.best_mean();
    let instance = env.instance();
    let mut state = UcbState::with_actions(actions.iter().cloned(), opts.exploration);
    let mut trace = RegretTrace::with_capacity(len, opts.record_actions);
    let mut x = vec![0; n];
    for _ in 0..len {
        let arm = state.select();
        let y = instance.sample_into(&actions[arm], rng, &mut x);
        state.record(arm, y);
        state.advance();
        trace.push(best - means[arm], &actions[arm]);
    }
    Ok(trace)
}

/// Detection threshold and per-value probe length of the parent search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RapsParams {
    pub epsilon: f64,
    /// Rounds per intervened value; `None` means `ceil(ln 10 / epsilon^2)`.
    pub probes: Option<u64>,
}

impl Default for RapsParams {
    fn default() -> Self {
        RapsParams {
            epsilon: 0.05,
            probes: None,
        }
    }
}

impl RapsParams {
    pub fn probes_per_value(&self) -> u64 {
        self.probes
            .unwrap_or_else(|| (10f64.ln() / (self.epsilon * self.epsilon)).ceil() as u64)
            .max(1)
    }
}

/// Outcome of the parent search.
#[derive(Debug, Clone, PartialEq)]
pub struct RapsSearch {
    /// Identified parents, sorted.
    pub parents: Vec<usize>,
    /// Rounds consumed.
    pub rounds: u64,
    /// Whether the round budget ran out before the search finished.
    pub truncated: bool,
}

/// Spread `max - min` of each column of `rows`.
fn spread(rows: &[Vec<f64>]) -> Vec<f64> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|c| {
            let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r[c]), hi.max(r[c]))
            });
            hi - lo
        })
        .collect()
}

/// Sequential parent search.
///
/// Each search starts from every node not yet found. A randomly chosen
/// candidate is probed by setting it to each of its values (with the found
/// parents held at value 1). If the reward mean moves by more than epsilon
/// the candidate becomes the current guess and the candidates shrink to its
/// detected descendants (nodes with some value frequency moving by more than
/// epsilon); either way the candidate is dropped. When no candidate remains,
/// the current guess is a parent. The search stops when a pass finds
/// nothing, `max_parents` are found, or `budget` rounds are used.
///
/// `on_round` sees every played action with its sample.
fn search_parents<R, F>(
    instance: &Instance,
    max_parents: usize,
    params: &RapsParams,
    budget: u64,
    rng: &mut R,
    mut on_round: F,
) -> Result<RapsSearch>
where
    R: Rng + ?Sized,
    F: FnMut(&Action, &[usize], f64) -> Result<()>,
{
    let (n, l) = (instance.n(), instance.cardinality());
    if l < 2 {
        return Err(Error::InvalidParameter("parent search needs l >= 2".into()));
    }
    let probes = params.probes_per_value();
    let mut found: Vec<usize> = Vec::new();
    let mut rounds = 0u64;
    let mut x = vec![0; n];
    'outer: while found.len() < max_parents {
        let mut candidates: BTreeSet<usize> = (0..n).filter(|v| !found.contains(v)).collect();
        let mut current = None;
        while !candidates.is_empty() {
            let v = *candidates
                .iter()
                .nth(rng.random_range(0..candidates.len()))
                .expect("index in range");
            candidates.remove(&v);
            let mut y_means = Vec::with_capacity(l);
            let mut freqs = Vec::with_capacity(l);
            for value in 1..=l {
                let mut nodes = found.clone();
                let mut values = vec![1; found.len()];
                nodes.push(v);
                values.push(value);
                let action = Action::new(nodes, values)?;
                let mut y_sum = 0.0;
                let mut counts = vec![0u64; n * l];
                for _ in 0..probes {
                    if rounds >= budget {
                        break 'outer;
                    }
                    let y = instance.sample_into(&action, rng, &mut x);
                    rounds += 1;
                    on_round(&action, &x, y)?;
                    y_sum += y;
                    for (u, &xu) in x.iter().enumerate() {
                        counts[u * l + xu - 1] += 1;
                    }
                }
                y_means.push(vec![y_sum / probes as f64]);
                freqs.push(counts.iter().map(|&c| c as f64 / probes as f64).collect());
            }
            if spread(&y_means)[0] > params.epsilon {
                let moved = spread(&freqs);
                current = Some(v);
                candidates.retain(|&u| moved[u * l..(u + 1) * l].iter().any(|&d| d > params.epsilon));
            }
        }
        match current {
            Some(v) => found.push(v),
            None => break,
        }
    }
    let truncated = rounds >= budget && found.len() < max_parents;
    found.sort_unstable();
    Ok(RapsSearch {
        parents: found,
        rounds,
        truncated,
    })
}

/// Runs only the parent search, with a round budget.
pub fn identify_parents_raps<R: Rng + ?Sized>(
    instance: &Instance,
    max_parents: usize,
    params: &RapsParams,
    budget: u64,
    rng: &mut R,
) -> Result<RapsSearch> {
    search_parents(instance, max_parents, params, budget, rng, |_, _, _| Ok(()))
}

/// Parent search followed by UCB1 over every assignment of the identified
/// parents. Search samples that agree with an assignment seed its
/// statistics, and the round counter continues from the search.
pub fn run_raps<R: Rng + ?Sized>(env: &BanditEnv, horizon: u64, opts: &RunOptions, rng: &mut R) -> Result<RegretTrace> {
    let len = horizon_len(horizon)?;
    let (n, l) = (env.n(), env.cardinality());
    let best = env.best_mean();
    let mut cache = MeanCache::new(env);
    let mut trace = RegretTrace::with_capacity(len, opts.record_actions);
    let mut history: Vec<usize> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    let search = search_parents(env.instance(), env.m(), &opts.raps, horizon, rng, |a, x, y| {
        trace.push(best - cache.mean(a)?, a);
        history.extend_from_slice(x);
        ys.push(y);
        Ok(())
    })?;

    let parents = search.parents;
    let arm_count = l.pow(parents.len() as u32);
    let actions = (0..arm_count)
        .map(|code| Action::new(parents.clone(), config_unrank(code, parents.len(), l)))
        .collect::<Result<Vec<_>>>()?;
    let means = actions.iter().map(|a| cache.mean(a)).collect::<Result<Vec<f64>>>()?;
    let mut seeded = vec![ArmStats::default(); arm_count];
    for (x, &y) in history.chunks_exact(n).zip(&ys) {
        let code = crate::combinatorics::config_rank(parents.iter().map(|&p| x[p]), l);
        seeded[code].record(y);
    }
    let mut state = UcbState::new(opts.exploration);
    for (a, s) in actions.iter().zip(seeded) {
        state.add_arm_with_stats(crate::bandit_core::ArmKind::Concrete(a.clone()), s);
    }
    state.set_round(search.rounds);
    let instance = env.instance();
    let mut x = vec![0; n];
    while trace.len() < len {
        let arm = state.select();
        let y = instance.sample_into(&actions[arm], rng, &mut x);
        state.record(arm, y);
        state.advance();
        trace.push(best - means[arm], &actions[arm]);
    }
    Ok(trace)
}
