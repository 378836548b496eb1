//! Phased subsampling with mixture arms when the number of reward parents
//! is unknown.

use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use super::{horizon_len, BanditEnv, RegretTrace, RunOptions};
use crate::bandit_core::{make_mixture, ArmKind, ArmStats, MixtureArm, UcbState};
use crate::combinatorics::Action;
use crate::error::{Error, Result};

/// Per-phase subset sizes and lengths.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseSchedule {
    pub phases: usize,
    pub q: Vec<u128>,
    pub dt: Vec<u128>,
}

impl PhaseSchedule {
    pub fn total_rounds(&self) -> u128 {
        self.dt.iter().sum()
    }
}

/// Smallest `e >= 0` with `4^e * scale >= target`.
fn ceil_log4(target: u128, scale: u128) -> u32 {
    let mut e = 0;
    let mut v = scale;
    while v < target {
        v = v.saturating_mul(4);
        e += 1;
    }
    e
}

/// Phase count `ceil(log2 sqrt(T m / (l n)))` (at least one), subset sizes
/// `q_i = 2^(r - i + 1)` and lengths `ceil(l n / m) 2^(r + i)` with
/// `r = ceil(log2 sqrt T)`. All arithmetic is exact.
pub fn compute_schedule(horizon: u64, n: usize, m: usize, l: usize) -> Result<PhaseSchedule> {
    if horizon < 4 {
        return Err(Error::InvalidParameter(format!("schedule needs T >= 4, got {horizon}")));
    }
    if m == 0 || m > n || l == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= m <= n and l >= 1, got n = {n}, m = {m}, l = {l}"
        )));
    }
    let t = horizon as u128;
    let (n, m, l) = (n as u128, m as u128, l as u128);
    let r = ceil_log4(t, 1);
    let phases = ceil_log4(t * m, l * n).max(1);
    let width = (l * n).div_ceil(m);
    let q = (1..=phases).map(|i| 1u128 << (r + 1 - i)).collect();
    let dt = (1..=phases)
        .map(|i| {
            width
                .checked_mul(1u128 << (r + i))
                .ok_or_else(|| Error::Overflow(format!("phase length at T = {horizon}")))
        })
        .collect::<Result<_>>()?;
    Ok(PhaseSchedule {
        phases: phases as usize,
        q,
        dt,
    })
}

/// Alg2: fresh UCB1 per phase over `q_i` random arms plus the mixture
/// arms of all earlier phases.
pub fn run_alg2_unknown_k<R: Rng + ?Sized>(
    env: &BanditEnv,
    horizon: u64,
    opts: &RunOptions,
    rng: &mut R,
) -> Result<RegretTrace> {
    run_phased(env, horizon, opts, false, rng)
}

/// Alg2 with statistics carried across phases and, after the first
/// phase, the `q_i` empirically best arms in place of a random draw.
pub fn run_emp_unknown_plus<R: Rng + ?Sized>(
    env: &BanditEnv,
    horizon: u64,
    opts: &RunOptions,
    rng: &mut R,
) -> Result<RegretTrace> {
    run_phased(env, horizon, opts, true, rng)
}

/// Draws `q` ranks with replacement; repeats collapse onto the first draw.
fn draw_with_replacement<R: Rng + ?Sized>(total: u128, q: u128, rng: &mut R) -> Vec<u128> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for _ in 0..q {
        let r = rng.random_range(0..total);
        if seen.insert(r) {
            out.push(r);
        }
    }
    out
}

/// The `q` ranks with the largest carried mean. Arms never seen count as
/// mean 0; ties go to the lower rank.
pub(crate) fn top_by_mean(carried: &HashMap<u128, ArmStats>, total: u128, q: u128) -> Vec<u128> {
    let mut seen: Vec<(f64, u128)> = carried
        .iter()
        .filter_map(|(&r, s)| s.mean().map(|mu| (mu, r)))
        .collect();
    seen.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let q = q.min(total) as usize;
    let mut out: Vec<u128> = seen
        .iter()
        .take_while(|(mu, _)| *mu > 0.0)
        .take(q)
        .map(|&(_, r)| r)
        .collect();
    let is_zero = |r: u128| carried.get(&r).and_then(ArmStats::mean).is_none_or(|mu| mu == 0.0);
    let mut r = 0;
    while out.len() < q && r < total {
        if is_zero(r) {
            out.push(r);
        }
        r += 1;
    }
    out.extend(
        seen.iter()
            .filter(|(mu, _)| *mu < 0.0)
            .take(q - out.len())
            .map(|&(_, r)| r),
    );
    out
}

struct Mixture {
    arm: Arc<MixtureArm>,
    mean: f64,
    stats: ArmStats,
}

fn run_phased<R: Rng + ?Sized>(
    env: &BanditEnv,
    horizon: u64,
    opts: &RunOptions,
    empirical: bool,
    rng: &mut R,
) -> Result<RegretTrace> {
    let len = horizon_len(horizon)?;
    let schedule = compute_schedule(horizon.max(4), env.n(), env.m(), env.cardinality())?;
    let total = env.arm_count();
    let instance = env.instance();
    let best = env.best_mean();
    let mut trace = RegretTrace::with_capacity(len, opts.record_actions);
    let mut mixtures: Vec<Mixture> = Vec::new();
    let mut carried: HashMap<u128, ArmStats> = HashMap::new();
    let mut x = vec![0; env.n()];

    for (phase, (&q, &dt)) in schedule.q.iter().zip(&schedule.dt).enumerate() {
        if trace.len() >= len {
            break;
        }
        let ranks = if empirical && phase > 0 {
            top_by_mean(&carried, total, q)
        } else {
            draw_with_replacement(total, q, rng)
        };
        let actions = ranks.iter().map(|&r| env.action(r)).collect::<Result<Vec<Action>>>()?;
        let means = ranks
            .iter()
            .map(|&r| env.mean_of_rank(r))
            .collect::<Result<Vec<f64>>>()?;
        let mut index_of: HashMap<&Action, usize> = HashMap::new();
        for (i, a) in actions.iter().enumerate() {
            index_of.insert(a, i);
        }

        let mut state = UcbState::new(opts.exploration);
        for (a, r) in actions.iter().zip(&ranks) {
            let stats = if empirical {
                carried.get(r).copied().unwrap_or_default()
            } else {
                ArmStats::default()
            };
            state.add_arm_with_stats(ArmKind::Concrete(a.clone()), stats);
        }
        for mix in &mixtures {
            let stats = if empirical { mix.stats } else { ArmStats::default() };
            state.add_arm_with_stats(ArmKind::Mixture(Arc::clone(&mix.arm)), stats);
        }
        if empirical {
            state.set_round(trace.len() as u64);
        }

        let rounds = (len - trace.len()).min(usize::try_from(dt).unwrap_or(usize::MAX));
        let mut played: Vec<Action> = Vec::with_capacity(rounds);
        let mut mean_sum = 0.0;
        let mut resolved: Vec<(Action, f64)> = Vec::new();
        for _ in 0..rounds {
            let arm = state.select();
            let action = state.resolve(arm, rng).clone();
            let y = instance.sample_into(&action, rng, &mut x);
            state.record(arm, y);
            state.advance();
            let (arm_mean, action_mean) = if arm < actions.len() {
                (means[arm], means[arm])
            } else {
                let mix = &mixtures[arm - actions.len()];
                let mu = match index_of.get(&action) {
                    Some(&i) => means[i],
                    None => {
                        env.mean_of_rank(crate::combinatorics::rank_action(&action, env.n(), env.cardinality())?)?
                    }
                };
                if empirical {
                    resolved.push((action.clone(), y));
                }
                (mix.mean, mu)
            };
            trace.push(best - arm_mean, &action);
            mean_sum += action_mean;
            played.push(action);
        }

        if empirical {
            for (i, r) in ranks.iter().enumerate() {
                carried.insert(*r, *state.stats(i));
            }
            for (j, mix) in mixtures.iter_mut().enumerate() {
                mix.stats = *state.stats(actions.len() + j);
            }
            for (a, y) in resolved {
                let r = crate::combinatorics::rank_action(&a, env.n(), env.cardinality())?;
                carried.entry(r).or_default().record(y);
            }
        }
        if !played.is_empty() {
            let count = played.len() as f64;
            mixtures.push(Mixture {
                arm: Arc::new(make_mixture(played)?),
                mean: mean_sum / count,
                stats: ArmStats::default(),
            });
        }
    }
    debug_assert_eq!(trace.len(), len);
    Ok(trace)
}
