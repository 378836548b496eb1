//! Regret-minimisation policies and parent-identification procedures.
//!
//! Every policy plays against a [`BanditEnv`] for a fixed horizon and
//! returns a [`RegretTrace`] whose per-round regret is computed from exact
//! oracle means, never from the sampled rewards.

mod baselines;
mod identify;
mod known_k;
mod unknown_k;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bandit_core::DEFAULT_EXPLORATION;
use crate::combinatorics::{action_count, unrank_action, Action};
use crate::error::{Error, Result};
use crate::scm::{Instance, DEFAULT_ENUMERATION_BUDGET};

pub use baselines::{identify_parents_raps, run_raps, run_standard_ucb, RapsParams, RapsSearch};
pub use identify::{identify_parents_unif, uniform_pull_counts};
pub use known_k::{alg1_arm_count, run_alg1_known_k, run_emp_known_plus, sample_arm_subset};
pub use unknown_k::{compute_schedule, run_alg2_unknown_k, run_emp_unknown_plus, PhaseSchedule};

/// Largest `|A_m|` for which all exact means are tabulated up front.
pub const DEFAULT_TABLE_LIMIT: u128 = 2_000_000;

/// An instance together with the intervention size `m` and its optimum.
#[derive(Debug, Clone)]
pub struct BanditEnv {
    instance: Instance,
    m: usize,
    arm_count: u128,
    table: Option<Vec<f64>>,
    best: f64,
    budget: u128,
}

impl BanditEnv {
    pub fn new(instance: Instance, m: usize) -> Result<Self> {
        Self::with_limits(instance, m, DEFAULT_TABLE_LIMIT, DEFAULT_ENUMERATION_BUDGET)
    }

    /// `table_limit` caps the tabulated arm count; `budget` caps the states
    /// enumerated per exact-mean query.
    ///
    /// The optimum is the maximum over `A_m`, which equals the maximum over
    /// every action of size at most `m`. Without a table it is only
    /// available when `m >= k`, where it is the largest reward mean over
    /// parent configurations.
    pub fn with_limits(instance: Instance, m: usize, table_limit: u128, budget: u128) -> Result<Self> {
        let (n, l) = (instance.n(), instance.cardinality());
        if m == 0 || m > n {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= m <= n, got m = {m}, n = {n}"
            )));
        }
        let arm_count = action_count(n, m, l)?;
        let (table, best) = if arm_count <= table_limit {
            let means = crate::scm::action_means(&instance, m, budget)?;
            let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (Some(means), best)
        } else if m >= instance.reward_parent_count() {
            let best = instance
                .reward()
                .means()
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            (None, best)
        } else {
            return Err(Error::BudgetExceeded {
                states: arm_count,
                budget: table_limit,
            });
        };
        Ok(BanditEnv {
            instance,
            m,
            arm_count,
            table,
            best,
            budget,
        })
    }

    pub fn instance(&self) -> &Instance {
        &self.instance
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn cardinality(&self) -> usize {
        self.instance.cardinality()
    }

    /// `|A_m|`.
    pub fn arm_count(&self) -> u128 {
        self.arm_count
    }

    /// `|A_m|` as an in-memory index; errors when it cannot be addressed.
    pub fn arm_count_usize(&self) -> Result<usize> {
        usize::try_from(self.arm_count).map_err(|_| Error::Overflow(format!("|A_m| = {}", self.arm_count)))
    }

    /// Best exact mean over all actions of size at most `m`.
    pub fn best_mean(&self) -> f64 {
        self.best
    }

    pub fn action(&self, rank: u128) -> Result<Action> {
        unrank_action(rank, self.n(), self.m, self.cardinality())
    }

    /// Exact mean of the action of `A_m` with the given rank.
    pub fn mean_of_rank(&self, rank: u128) -> Result<f64> {
        match &self.table {
            Some(t) => t.get(rank as usize).copied().ok_or(Error::RankOutOfRange {
                rank,
                size: self.arm_count,
            }),
            None => self.mean_of(&self.action(rank)?),
        }
    }

    /// Exact mean of any action.
    pub fn mean_of(&self, action: &Action) -> Result<f64> {
        self.instance.exact_mean_reward_with_budget(action, self.budget)
    }

    /// The tabulated means of `A_m`, if present.
    pub fn table(&self) -> Option<&[f64]> {
        self.table.as_deref()
    }
}

/// Per-run cache of exact means for actions outside the rank table.
#[derive(Debug)]
pub(crate) struct MeanCache<'a> {
    env: &'a BanditEnv,
    cache: HashMap<Action, f64>,
}

impl<'a> MeanCache<'a> {
    pub(crate) fn new(env: &'a BanditEnv) -> Self {
        MeanCache {
            env,
            cache: HashMap::new(),
        }
    }

    pub(crate) fn mean(&mut self, action: &Action) -> Result<f64> {
        if let Some(&mu) = self.cache.get(action) {
            return Ok(mu);
        }
        let mu = self.env.mean_of(action)?;
        self.cache.insert(action.clone(), mu);
        Ok(mu)
    }
}

/// How an observation is shared among the arms of the known-`k` policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SharingScope {
    /// Only the played arm is updated.
    None,
    /// Every arm of the sampled subset consistent with the observation is updated.
    #[default]
    Subset,
}

/// Knobs shared by all policies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunOptions {
    /// Exploration constant of the UCB1 index.
    pub exploration: f64,
    /// Keep the played action of every round in the trace.
    pub record_actions: bool,
    /// Sample sharing for the empirical known-`k` variant.
    pub sharing: SharingScope,
    /// Run the standard UCB baseline over every action of size at most `m`
    /// instead of `A_m` alone.
    pub full_action_space: bool,
    pub raps: RapsParams,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            exploration: DEFAULT_EXPLORATION,
            record_actions: false,
            sharing: SharingScope::Subset,
            full_action_space: false,
            raps: RapsParams::default(),
        }
    }
}

/// Expected regret of every round of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub instantaneous: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub actions: Option<Vec<Action>>,
}

impl RegretTrace {
    pub(crate) fn with_capacity(horizon: usize, record_actions: bool) -> Self {
        RegretTrace {
            instantaneous: Vec::with_capacity(horizon),
            cumulative: Vec::with_capacity(horizon),
            actions: record_actions.then(|| Vec::with_capacity(horizon)),
        }
    }

    /// Appends one round. Round-off below zero is clamped so the cumulative
    /// sequence never decreases.
    pub(crate) fn push(&mut self, regret: f64, action: &Action) {
        let r = regret.max(0.0);
        let total = self.cumulative.last().copied().unwrap_or(0.0) + r;
        self.instantaneous.push(r);
        self.cumulative.push(total);
        if let Some(actions) = &mut self.actions {
            actions.push(action.clone());
        }
    }

    pub fn len(&self) -> usize {
        self.instantaneous.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instantaneous.is_empty()
    }

    /// Cumulative regret after the last round.
    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// The policy registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Policy {
    #[serde(rename = "ucb")]
    StandardUcb,
    #[serde(rename = "alg1")]
    KnownK,
    #[serde(rename = "alg2")]
    UnknownK,
    #[serde(rename = "empknown+")]
    EmpKnownPlus,
    #[serde(rename = "empunknown+")]
    EmpUnknownPlus,
    #[serde(rename = "raps")]
    Raps,
}

impl Policy {
    pub const ALL: [Policy; 6] = [
        Policy::EmpKnownPlus,
        Policy::EmpUnknownPlus,
        Policy::Raps,
        Policy::StandardUcb,
        Policy::KnownK,
        Policy::UnknownK,
    ];

    /// Short registry key, as accepted on the command line.
    pub fn key(self) -> &'static str {
        match self {
            Policy::StandardUcb => "ucb",
            Policy::KnownK => "alg1",
            Policy::UnknownK => "alg2",
            Policy::EmpKnownPlus => "empknown+",
            Policy::EmpUnknownPlus => "empunknown+",
            Policy::Raps => "raps",
        }
    }

    /// Display name used in output files.
    pub fn name(self) -> &'static str {
        match self {
            Policy::StandardUcb => "StandardUCB",
            Policy::KnownK => "Alg1",
            Policy::UnknownK => "Alg2",
            Policy::EmpKnownPlus => "EmpKnownUCB+",
            Policy::EmpUnknownPlus => "EmpUnknownUCB+",
            Policy::Raps => "RAPS",
        }
    }

    /// Runs the policy. Known-`k` policies receive the instance's true `k`.
    pub fn run<R: Rng + ?Sized>(
        self,
        env: &BanditEnv,
        horizon: u64,
        opts: &RunOptions,
        rng: &mut R,
    ) -> Result<RegretTrace> {
        let k = env.instance().reward_parent_count();
        match self {
            Policy::StandardUcb => run_standard_ucb(env, horizon, opts, rng),
            Policy::KnownK => run_alg1_known_k(env, k, horizon, opts, rng),
            Policy::UnknownK => run_alg2_unknown_k(env, horizon, opts, rng),
            Policy::EmpKnownPlus => run_emp_known_plus(env, k, horizon, opts, rng),
            Policy::EmpUnknownPlus => run_emp_unknown_plus(env, horizon, opts, rng),
            Policy::Raps => run_raps(env, horizon, opts, rng),
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Policy::ALL
            .into_iter()
            .find(|p| p.key() == lower || p.name().to_ascii_lowercase() == lower)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown algorithm '{s}' (expected one of: {})",
                    Policy::ALL.map(Policy::key).join(", ")
                ))
            })
    }
}

pub(crate) fn horizon_len(horizon: u64) -> Result<usize> {
    usize::try_from(horizon).map_err(|_| Error::Overflow(format!("horizon {horizon}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{generate_random_instance, GeneratorParams};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn policy_names_round_trip() {
        for p in Policy::ALL {
            assert_eq!(p.key().parse::<Policy>().unwrap(), p);
            assert_eq!(p.name().parse::<Policy>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("\"{}\"", p.key()));
        }
        assert!("thompson".parse::<Policy>().is_err());
    }

    #[test]
    fn env_optimum_matches_parent_shortcut() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let inst = generate_random_instance(&GeneratorParams::with_defaults(6, 3, 2), &mut rng).unwrap();
            let full = BanditEnv::new(inst.clone(), 3).unwrap();
            let lazy = BanditEnv::with_limits(inst, 3, 0, DEFAULT_ENUMERATION_BUDGET).unwrap();
            assert!(lazy.table().is_none());
            assert!((full.best_mean() - lazy.best_mean()).abs() <= 1e-12);
            for r in [0u128, 17, 100, 539] {
                assert_eq!(full.mean_of_rank(r).unwrap(), lazy.mean_of_rank(r).unwrap());
            }
        }
    }

    #[test]
    fn env_without_table_needs_m_at_least_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = generate_random_instance(&GeneratorParams::with_defaults(6, 2, 4), &mut rng).unwrap();
        assert!(BanditEnv::with_limits(inst.clone(), 2, 0, DEFAULT_ENUMERATION_BUDGET).is_err());
        assert!(BanditEnv::new(inst.clone(), 2).is_ok());
        assert!(BanditEnv::new(inst, 0).is_err());
    }

    #[test]
    fn trace_clamps_roundoff() {
        let mut t = RegretTrace::with_capacity(3, true);
        t.push(0.5, &Action::empty());
        t.push(-1e-17, &Action::empty());
        t.push(0.25, &Action::empty());
        assert_eq!(t.cumulative, vec![0.5, 0.5, 0.75]);
        assert_eq!(t.actions.as_ref().unwrap().len(), 3);
        assert_eq!(t.final_regret(), 0.75);
    }
}
