//! Random arm subsampling when the number of reward parents is known.

use std::collections::HashMap;

use rand::Rng;

use super::{horizon_len, BanditEnv, RegretTrace, RunOptions, SharingScope};
use crate::bandit_core::UcbState;
use crate::combinatorics::{action_count, binomial, checked_pow, config_rank, Action};
use crate::error::{Error, Result};

/// Number of arms `n0` drawn from `A_m`.
///
/// For `m >= k` this is `ceil(l^k C(n,k)/C(m,k) ln sqrt(T))`, otherwise all
/// of `A_m`; in both cases clipped to `[1, |A_m|]`.
pub fn alg1_arm_count(n: usize, l: usize, k: usize, m: usize, horizon: u64) -> Result<u128> {
    if m == 0 || m > n || k > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= m <= n and k <= n, got n = {n}, k = {k}, m = {m}"
        )));
    }
    let total = action_count(n, m, l)?;
    if m < k {
        return Ok(total);
    }
    let ratio = checked_pow(l as u64, k as u64)? as f64 * binomial(n as u64, k as u64)? as f64
        / binomial(m as u64, k as u64)? as f64;
    let raw = (ratio * (horizon.max(1) as f64).sqrt().ln()).ceil();
    let n0 = if raw >= total as f64 { total } else { raw as u128 };
    Ok(n0.clamp(1, total))
}

/// Draws `count` distinct ranks of `A_m` uniformly, returned in ascending order.
pub fn sample_arm_subset<R: Rng + ?Sized>(env: &BanditEnv, count: u128, rng: &mut R) -> Result<Vec<u128>> {
    let total = env.arm_count_usize()?;
    let count = usize::try_from(count.min(total as u128)).expect("bounded by total");
    let mut ranks: Vec<u128> = rand::seq::index::sample(rng, total, count)
        .into_iter()
        .map(|r| r as u128)
        .collect();
    ranks.sort_unstable();
    Ok(ranks)
}

/// Alg1: UCB1 over `n0` arms drawn from `A_m` without replacement.
pub fn run_alg1_known_k<R: Rng + ?Sized>(
    env: &BanditEnv,
    k: usize,
    horizon: u64,
    opts: &RunOptions,
    rng: &mut R,
) -> Result<RegretTrace> {
    run_known(env, k, horizon, opts, SharingScope::None, rng)
}

/// Alg1 where every observation also updates each sampled arm whose
/// assignment agrees with the observed values.
pub fn run_emp_known_plus<R: Rng + ?Sized>(
    env: &BanditEnv,
    k: usize,
    horizon: u64,
    opts: &RunOptions,
    rng: &mut R,
) -> Result<RegretTrace> {
    run_known(env, k, horizon, opts, opts.sharing, rng)
}

/// Arms of one intervened subset, keyed by the value code of their assignment.
struct SubsetGroup {
    nodes: Vec<usize>,
    arms: HashMap<usize, usize>,
}

fn group_by_subset(actions: &[Action], l: usize) -> Vec<SubsetGroup> {
    let mut groups: Vec<SubsetGroup> = Vec::new();
    let mut by_nodes: HashMap<&[usize], usize> = HashMap::new();
    for (arm, a) in actions.iter().enumerate() {
        let g = *by_nodes.entry(a.nodes()).or_insert_with(|| {
            groups.push(SubsetGroup {
                nodes: a.nodes().to_vec(),
                arms: HashMap::new(),
            });
            groups.len() - 1
        });
        groups[g].arms.insert(config_rank(a.values().iter().copied(), l), arm);
    }
    groups
}

fn run_known<R: Rng + ?Sized>(
    env: &BanditEnv,
    k: usize,
    horizon: u64,
    opts: &RunOptions,
    sharing: SharingScope,
    rng: &mut R,
) -> Result<RegretTrace> {
    let (n, l, m) = (env.n(), env.cardinality(), env.m());
    let len = horizon_len(horizon)?;
    let n0 = alg1_arm_count(n, l, k, m, horizon)?;
    let ranks = sample_arm_subset(env, n0, rng)?;
    let actions = ranks.iter().map(|&r| env.action(r)).collect::<Result<Vec<_>>>()?;
    let gaps = ranks
        .iter()
        .map(|&r| Ok(env.best_mean() - env.mean_of_rank(r)?))
        .collect::<Result<Vec<f64>>>()?;
    let groups = match sharing {
        SharingScope::Subset => group_by_subset(&actions, l),
        SharingScope::None => Vec::new(),
    };

    let instance = env.instance();
    let mut state = UcbState::with_actions(actions.iter().cloned(), opts.exploration);
    let mut trace = RegretTrace::with_capacity(len, opts.record_actions);
    let mut x = vec![0; n];
    for _ in 0..len {
        let arm = state.select();
        let y = instance.sample_into(&actions[arm], rng, &mut x);
        match sharing {
            SharingScope::None => state.record(arm, y),
            SharingScope::Subset => {
                for g in &groups {
                    let code = config_rank(g.nodes.iter().map(|&v| x[v]), l);
                    if let Some(&other) = g.arms.get(&code) {
                        state.record(other, y);
                    }
                }
            }
        }
        state.advance();
        trace.push(gaps[arm], &actions[arm]);
    }
    Ok(trace)
}
