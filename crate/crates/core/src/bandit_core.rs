//! UCB1 engine shared by every policy.
//!
//! Arms are either concrete actions or mixture arms that replay a uniformly
//! drawn action from a recorded multiset. Unpulled arms have an infinite
//! index; ties go to the lowest arm id.

use std::sync::Arc;

use rand::Rng;

use crate::combinatorics::Action;
use crate::error::{Error, Result};
use crate::scm::{Instance, Observation};

/// Exploration constant `c` in `mean + sqrt(c ln t / pulls)`.
pub const DEFAULT_EXPLORATION: f64 = 2.0;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ArmStats {
    pub pulls: u64,
    pub reward_sum: f64,
}

impl ArmStats {
    /// Empirical mean, defined once the arm has been pulled.
    pub fn mean(&self) -> Option<f64> {
        (self.pulls > 0).then(|| self.reward_sum / self.pulls as f64)
    }

    pub fn record(&mut self, reward: f64) {
        self.pulls += 1;
        self.reward_sum += reward;
    }
}

/// UCB1 index with the default exploration constant.
pub fn ucb_index(stats: &ArmStats, t: f64) -> f64 {
    ucb_index_with(stats, t, DEFAULT_EXPLORATION)
}

pub fn ucb_index_with(stats: &ArmStats, t: f64, exploration: f64) -> f64 {
    match stats.mean() {
        None => f64::INFINITY,
        Some(mean) => mean + bonus_scale(t, exploration) / (stats.pulls as f64).sqrt(),
    }
}

fn bonus_scale(t: f64, exploration: f64) -> f64 {
    (exploration * t.max(1.0).ln()).sqrt()
}

/// A randomized arm over a multiset of actions.
///
/// Distinct actions are kept in first-seen order with cumulative counts.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureArm {
    actions: Vec<Action>,
    cumulative: Vec<u64>,
}

impl MixtureArm {
    /// Total multiplicity.
    pub fn len(&self) -> u64 {
        *self.cumulative.last().expect("mixtures are non-empty")
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Distinct constituents with their multiplicities.
    pub fn constituents(&self) -> impl Iterator<Item = (&Action, u64)> + '_ {
        self.actions.iter().zip(
            self.cumulative
                .iter()
                .scan(0, |prev, &c| Some(c - std::mem::replace(prev, c))),
        )
    }

    /// Uniform draw from the multiset.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &Action {
        let u = rng.random_range(0..self.len());
        let i = self.cumulative.partition_point(|&c| c <= u);
        &self.actions[i]
    }

    /// Multiplicity-weighted average of `mean_of` over the constituents.
    pub fn mean_with<F>(&self, mut mean_of: F) -> Result<f64>
    where
        F: FnMut(&Action) -> Result<f64>,
    {
        let mut total = 0.0;
        for (a, count) in self.constituents() {
            total += count as f64 * mean_of(a)?;
        }
        Ok(total / self.len() as f64)
    }

    /// Exact expected reward of playing this arm on `instance`.
    pub fn exact_mean(&self, instance: &Instance) -> Result<f64> {
        self.mean_with(|a| instance.exact_mean_reward(a))
    }
}

/// Builds a mixture arm from the actions played in one phase.
pub fn make_mixture<I>(actions_played: I) -> Result<MixtureArm>
where
    I: IntoIterator<Item = Action>,
{
    let mut position = std::collections::HashMap::new();
    let mut actions = Vec::new();
    let mut counts: Vec<u64> = Vec::new();
    for a in actions_played {
        match position.get(&a) {
            Some(&i) => counts[i] += 1,
            None => {
                position.insert(a.clone(), actions.len());
                actions.push(a);
                counts.push(1);
            }
        }
    }
    if actions.is_empty() {
        return Err(Error::EmptyMixture);
    }
    let cumulative = counts
        .iter()
        .scan(0, |acc, &c| {
            *acc += c;
            Some(*acc)
        })
        .collect();
    Ok(MixtureArm { actions, cumulative })
}

#[derive(Debug, Clone)]
pub enum ArmKind {
    Concrete(Action),
    Mixture(Arc<MixtureArm>),
}

#[derive(Debug, Clone)]
pub struct Arm {
    pub id: usize,
    pub kind: ArmKind,
}

/// Per-arm statistics and the round counter of one UCB run.
#[derive(Debug, Clone)]
pub struct UcbState {
    arms: Vec<Arm>,
    stats: Vec<ArmStats>,
    means: Vec<f64>,
    root_pulls: Vec<f64>,
    first_unpulled: usize,
    t: u64,
    exploration: f64,
}

/// The outcome of one [`ucb_step`].
#[derive(Debug, Clone)]
pub struct Step {
    pub arm: usize,
    pub action: Action,
    pub observation: Observation,
}

impl UcbState {
    pub fn new(exploration: f64) -> Self {
        UcbState {
            arms: Vec::new(),
            stats: Vec::new(),
            means: Vec::new(),
            root_pulls: Vec::new(),
            first_unpulled: 0,
            t: 0,
            exploration,
        }
    }

    /// A state over the given concrete actions, ids in order.
    pub fn with_actions(actions: impl IntoIterator<Item = Action>, exploration: f64) -> Self {
        let mut state = UcbState::new(exploration);
        for a in actions {
            state.add_arm(ArmKind::Concrete(a));
        }
        state
    }

    /// Adds an arm and returns its id (its position).
    pub fn add_arm(&mut self, kind: ArmKind) -> usize {
        self.add_arm_with_stats(kind, ArmStats::default())
    }

    /// Adds an arm carrying previously collected statistics.
    pub fn add_arm_with_stats(&mut self, kind: ArmKind, stats: ArmStats) -> usize {
        let id = self.arms.len();
        self.arms.push(Arm { id, kind });
        self.stats.push(ArmStats::default());
        self.means.push(0.0);
        self.root_pulls.push(0.0);
        self.set_stats(id, stats);
        id
    }

    pub fn arms(&self) -> &[Arm] {
        &self.arms
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn stats(&self, arm: usize) -> &ArmStats {
        &self.stats[arm]
    }

    pub fn all_stats(&self) -> &[ArmStats] {
        &self.stats
    }

    /// Rounds played so far.
    pub fn round(&self) -> u64 {
        self.t
    }

    /// Overrides the round counter, e.g. to account for earlier samples.
    pub fn set_round(&mut self, t: u64) {
        self.t = t;
    }

    pub fn exploration(&self) -> f64 {
        self.exploration
    }

    fn set_stats(&mut self, arm: usize, stats: ArmStats) {
        self.stats[arm] = stats;
        if let Some(mean) = stats.mean() {
            self.means[arm] = mean;
            self.root_pulls[arm] = (stats.pulls as f64).sqrt();
        }
        if stats.pulls == 0 {
            self.first_unpulled = self.first_unpulled.min(arm);
        }
    }

    /// Index of `arm` at the current round.
    pub fn index(&self, arm: usize) -> f64 {
        ucb_index_with(&self.stats[arm], self.t as f64, self.exploration)
    }

    /// The arm with the largest index, lowest id on ties.
    pub fn select(&mut self) -> usize {
        assert!(!self.arms.is_empty(), "UCB needs at least one arm");
        while self.first_unpulled < self.stats.len() && self.stats[self.first_unpulled].pulls > 0 {
            self.first_unpulled += 1;
        }
        if self.first_unpulled < self.stats.len() {
            return self.first_unpulled;
        }
        let scale = bonus_scale(self.t as f64, self.exploration);
        let mut best = 0;
        let mut best_index = f64::NEG_INFINITY;
        for (i, (&mean, &root)) in self.means.iter().zip(&self.root_pulls).enumerate() {
            let index = mean + scale / root;
            if index > best_index {
                best_index = index;
                best = i;
            }
        }
        best
    }

    /// The concrete action played when `arm` is chosen.
    pub fn resolve<R: Rng + ?Sized>(&self, arm: usize, rng: &mut R) -> &Action {
        match &self.arms[arm].kind {
            ArmKind::Concrete(a) => a,
            ArmKind::Mixture(mix) => mix.draw(rng),
        }
    }

    /// Adds one reward sample to `arm` without advancing the round.
    pub fn record(&mut self, arm: usize, reward: f64) {
        let s = &mut self.stats[arm];
        s.record(reward);
        self.means[arm] = s.reward_sum / s.pulls as f64;
        self.root_pulls[arm] = (s.pulls as f64).sqrt();
    }

    pub fn advance(&mut self) {
        self.t += 1;
    }
}

/// One UCB round: select, resolve mixtures, sample, update.
pub fn ucb_step<R: Rng + ?Sized>(state: &mut UcbState, instance: &Instance, rng: &mut R) -> Result<Step> {
    let arm = state.select();
    let action = state.resolve(arm, rng).clone();
    let observation = instance.sample(&action, rng)?;
    state.record(arm, observation.y);
    state.advance();
    Ok(Step {
        arm,
        action,
        observation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::{CategoricalCpt, CausalGraph, RewardKind, RewardModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn act(node: usize, v: usize) -> Action {
        Action::new(vec![node], vec![v]).unwrap()
    }

    /// One binary root whose value alone sets a deterministic reward.
    fn two_arm_instance(mu1: f64, mu2: f64) -> Instance {
        let cpts = vec![CategoricalCpt::constant(2, 1, 1)];
        let reward = RewardModel::new(RewardKind::Bernoulli, vec![0], vec![mu1, mu2]).unwrap();
        Instance::new(CausalGraph::empty(1), 2, cpts, reward).unwrap()
    }

    #[test]
    fn index_values() {
        assert_eq!(ucb_index(&ArmStats::default(), 10.0), f64::INFINITY);
        let s = ArmStats {
            pulls: 100,
            reward_sum: 50.0,
        };
        let expected = 0.5 + (8.0f64 / 100.0).sqrt();
        assert!((ucb_index(&s, 4f64.exp()) - expected).abs() < 1e-12);
        assert!((ucb_index(&s, 4f64.exp()) - 0.7828).abs() < 1e-4);
    }

    #[test]
    fn index_nonincreasing_in_pulls() {
        let mut prev = f64::INFINITY;
        for pulls in 1..200u64 {
            let s = ArmStats {
                pulls,
                reward_sum: 0.3 * pulls as f64,
            };
            let idx = ucb_index(&s, 500.0);
            assert!(idx <= prev + 1e-12);
            prev = idx;
        }
    }

    #[test]
    fn fresh_arms_played_in_id_order() {
        let inst = two_arm_instance(0.2, 0.7);
        let mut state = UcbState::with_actions([act(0, 1), act(0, 2), Action::empty()], DEFAULT_EXPLORATION);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let played: Vec<usize> = (0..3)
            .map(|_| ucb_step(&mut state, &inst, &mut rng).unwrap().arm)
            .collect();
        assert_eq!(played, vec![0, 1, 2]);
        assert_eq!(state.round(), 3);
    }

    #[test]
    fn converges_to_better_arm() {
        let inst = two_arm_instance(0.0, 1.0);
        let mut state = UcbState::with_actions([act(0, 1), act(0, 2)], DEFAULT_EXPLORATION);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            ucb_step(&mut state, &inst, &mut rng).unwrap();
        }
        assert!(state.stats(1).pulls >= 90, "{:?}", state.all_stats());
    }

    #[test]
    fn every_arm_once_before_any_twice() {
        let inst = two_arm_instance(0.5, 0.5);
        let mut state = UcbState::new(DEFAULT_EXPLORATION);
        for _ in 0..7 {
            state.add_arm(ArmKind::Concrete(act(0, 2)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for step in 0..7 {
            ucb_step(&mut state, &inst, &mut rng).unwrap();
            assert!(state.all_stats().iter().all(|s| s.pulls <= 1), "step {step}");
        }
        assert!(state.all_stats().iter().all(|s| s.pulls == 1));
        let late = state.add_arm(ArmKind::Concrete(act(0, 1)));
        assert_eq!(state.select(), late);
    }

    #[test]
    fn select_agrees_with_index_function() {
        let mut state = UcbState::new(DEFAULT_EXPLORATION);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for i in 0..20 {
            state.add_arm(ArmKind::Concrete(act(0, 1 + i % 2)));
        }
        for _ in 0..500 {
            let arm = state.select();
            let best = (0..state.len())
                .map(|i| state.index(i))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(state.index(arm), best);
            state.record(arm, rng.random::<f64>());
            state.advance();
        }
    }

    #[test]
    fn mixture_draws_uniformly() {
        let mix = make_mixture([act(0, 1), act(0, 2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let first = (0..10_000).filter(|_| mix.draw(&mut rng) == &act(0, 1)).count();
        assert!((first as f64 / 1e4 - 0.5).abs() <= 0.05);
    }

    #[test]
    fn mixture_mean_is_weighted_average() {
        let inst = two_arm_instance(0.0, 1.0);
        let even = make_mixture([act(0, 1), act(0, 2)]).unwrap();
        assert_eq!(even.exact_mean(&inst).unwrap(), 0.5);
        let single = make_mixture([act(0, 2)]).unwrap();
        assert_eq!(single.exact_mean(&inst).unwrap(), 1.0);

        let skewed_inst = two_arm_instance(0.8, 0.0);
        let skewed = make_mixture([act(0, 1), act(0, 2), act(0, 1), act(0, 1)]).unwrap();
        assert_eq!(skewed.len(), 4);
        let counts: Vec<u64> = skewed.constituents().map(|(_, c)| c).collect();
        assert_eq!(counts, vec![3, 1]);
        assert!((skewed.exact_mean(&skewed_inst).unwrap() - 0.6).abs() < 1e-12);

        assert!(matches!(make_mixture(Vec::new()), Err(Error::EmptyMixture)));
    }

    #[test]
    fn mixture_arm_resolves_to_constituent() {
        let inst = two_arm_instance(0.0, 1.0);
        let mix = Arc::new(make_mixture([act(0, 2)]).unwrap());
        let mut state = UcbState::new(DEFAULT_EXPLORATION);
        state.add_arm(ArmKind::Mixture(mix));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let step = ucb_step(&mut state, &inst, &mut rng).unwrap();
        assert_eq!(step.action, act(0, 2));
        assert_eq!(step.observation.y, 1.0);
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let inst = two_arm_instance(0.4, 0.6);
        let run = |seed| {
            let mut state = UcbState::with_actions([act(0, 1), act(0, 2)], DEFAULT_EXPLORATION);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..300)
                .map(|_| ucb_step(&mut state, &inst, &mut rng).unwrap().arm)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
    }
}
