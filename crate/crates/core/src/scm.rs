//! Discrete structural causal models with hard interventions.
//!
//! Every variable takes values in `1..=l`. Interventions are realised by
//! graph mutilation: an intervened node ignores its CPT and keeps the
//! assigned value. The reward `Y` depends only on its parent set `Pa_Y`.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::combinatorics::{action_count, config_rank, unrank_action, Action};
use crate::error::{Error, Result};

/// Default cap on the number of joint states enumerated by the exact oracle.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// A DAG over `n` variables stored as sorted parent lists.
#[derive(Debug, Clone, PartialEq)]
pub struct CausalGraph {
    parents: Vec<Vec<usize>>,
    order: Vec<usize>,
}

impl CausalGraph {
    /// Validates the parent lists and derives a topological order.
    pub fn new(mut parents: Vec<Vec<usize>>) -> Result<Self> {
        let n = parents.len();
        for (v, ps) in parents.iter_mut().enumerate() {
            ps.sort_unstable();
            if ps.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInstance(format!("node {v} has a duplicate parent")));
            }
            if ps.iter().any(|&p| p >= n || p == v) {
                return Err(Error::InvalidInstance(format!("node {v} has an invalid parent")));
            }
        }
        let order = topological_order(&parents).ok_or_else(|| Error::InvalidInstance("graph has a cycle".into()))?;
        Ok(CausalGraph { parents, order })
    }

    /// The graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        CausalGraph {
            parents: vec![Vec::new(); n],
            order: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn parent_lists(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }
}

/// Kahn's algorithm, always emitting the smallest ready index first.
fn topological_order(parents: &[Vec<usize>]) -> Option<Vec<usize>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (v, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(v);
        }
    }
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// `P(X | Pa(X))` as one probability row per parent configuration.
///
/// Rows are indexed by the base-`l` rank of the parent values (see
/// [`config_rank`]).
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalCpt {
    cardinality: usize,
    rows: Vec<Vec<f64>>,
}

impl CategoricalCpt {
    pub fn new(cardinality: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        for row in &rows {
            if row.len() != cardinality {
                return Err(Error::InvalidInstance(format!(
                    "CPT row has {} entries, expected {cardinality}",
                    row.len()
                )));
            }
            if row.iter().any(|&p| p.is_nan() || p < 0.0 || !p.is_finite()) {
                return Err(Error::InvalidInstance("negative CPT entry".into()));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidInstance(format!("CPT row sums to {sum}")));
            }
        }
        Ok(CategoricalCpt { cardinality, rows })
    }

    /// A deterministic node that always takes `value`, for any parent values.
    pub fn constant(cardinality: usize, n_rows: usize, value: usize) -> Self {
        let mut row = vec![0.0; cardinality];
        row[value - 1] = 1.0;
        CategoricalCpt {
            cardinality,
            rows: vec![row; n_rows],
        }
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, config: usize) -> &[f64] {
        &self.rows[config]
    }

    fn draw<R: Rng + ?Sized>(&self, config: usize, rng: &mut R) -> usize {
        let row = &self.rows[config];
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in row.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = i;
                if u < acc {
                    return i + 1;
                }
            }
        }
        last + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RewardKind {
    /// `Y ~ Bernoulli(mean)`; means must lie in `[0, 1]`.
    Bernoulli,
    /// `Y ~ N(mean, 1)`.
    Gaussian,
}

/// Reward distribution as a function of the parent configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardModel {
    kind: RewardKind,
    parents: Vec<usize>,
    means: Vec<f64>,
}

impl RewardModel {
    pub fn new(kind: RewardKind, mut parents: Vec<usize>, means: Vec<f64>) -> Result<Self> {
        parents.sort_unstable();
        if parents.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance("duplicate reward parent".into()));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidInstance("non-finite reward mean".into()));
        }
        if kind == RewardKind::Bernoulli && means.iter().any(|&m| !(0.0..=1.0).contains(&m)) {
            return Err(Error::InvalidInstance("Bernoulli reward mean outside [0, 1]".into()));
        }
        Ok(RewardModel { kind, parents, means })
    }

    pub fn kind(&self) -> RewardKind {
        self.kind
    }

    /// `Pa_Y`, sorted.
    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    /// Mean reward indexed by parent configuration rank.
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// True when every mean lies in `[0, 1]`; perturbed instances with a gap
    /// above one violate this.
    pub fn in_unit_interval(&self) -> bool {
        self.means.iter().all(|m| (0.0..=1.0).contains(m))
    }

    fn mean_at(&self, x: &[usize], l: usize) -> f64 {
        self.means[config_rank(self.parents.iter().map(|&p| x[p]), l)]
    }
}

/// A causal bandit environment: graph, CPTs and reward model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceFile", into = "InstanceFile")]
pub struct Instance {
    graph: CausalGraph,
    cardinality: usize,
    cpts: Vec<CategoricalCpt>,
    reward: RewardModel,
}

/// One interventional sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub x: Vec<usize>,
    pub y: f64,
}

impl Instance {
    pub fn new(graph: CausalGraph, cardinality: usize, cpts: Vec<CategoricalCpt>, reward: RewardModel) -> Result<Self> {
        let n = graph.n();
        if cardinality == 0 {
            return Err(Error::InvalidInstance("cardinality must be >= 1".into()));
        }
        if cpts.len() != n {
            return Err(Error::InvalidInstance(format!("{} CPTs for {n} nodes", cpts.len())));
        }
        for (v, cpt) in cpts.iter().enumerate() {
            let expected = cardinality.pow(graph.parents(v).len() as u32);
            if cpt.cardinality != cardinality || cpt.rows.len() != expected {
                return Err(Error::InvalidInstance(format!(
                    "CPT of node {v} has {} rows of width {}, expected {expected} rows of width {cardinality}",
                    cpt.rows.len(),
                    cpt.cardinality
                )));
            }
        }
        if reward.parents.iter().any(|&p| p >= n) {
            return Err(Error::InvalidInstance("reward parent out of range".into()));
        }
        let expected = cardinality.pow(reward.parents.len() as u32);
        if reward.means.len() != expected {
            return Err(Error::InvalidInstance(format!(
                "reward has {} means, expected {expected}",
                reward.means.len()
            )));
        }
        Ok(Instance {
            graph,
            cardinality,
            cpts,
            reward,
        })
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Number of values `l` each variable can take.
    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn cpt(&self, node: usize) -> &CategoricalCpt {
        &self.cpts[node]
    }

    pub fn reward(&self) -> &RewardModel {
        &self.reward
    }

    /// `k = |Pa_Y|`.
    pub fn reward_parent_count(&self) -> usize {
        self.reward.parents.len()
    }

    /// Draws `(x, y)` from the post-interventional distribution.
    pub fn sample<R: Rng + ?Sized>(&self, action: &Action, rng: &mut R) -> Result<Observation> {
        action.validate(self.n(), self.cardinality)?;
        let mut x = vec![0; self.n()];
        let y = self.sample_into(action, rng, &mut x);
        Ok(Observation { x, y })
    }

    /// Unchecked sampling into a caller-owned buffer of length `n`.
    /// The action must already be valid for this instance.
    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, action: &Action, rng: &mut R, x: &mut [usize]) -> f64 {
        x.fill(0);
        for (node, v) in action.assignments() {
            x[node] = v;
        }
        let l = self.cardinality;
        for &v in self.graph.topological_order() {
            if x[v] != 0 {
                continue;
            }
            let config = config_rank(self.graph.parents(v).iter().map(|&p| x[p]), l);
            x[v] = self.cpts[v].draw(config, rng);
        }
        let mean = self.reward.mean_at(x, l);
        match self.reward.kind {
            RewardKind::Bernoulli => {
                if rng.random::<f64>() < mean {
                    1.0
                } else {
                    0.0
                }
            }
            RewardKind::Gaussian => mean + rng.sample::<f64, _>(StandardNormal),
        }
    }

    /// `E[Y | do(action)]` by exact enumeration with the default budget.
    pub fn exact_mean_reward(&self, action: &Action) -> Result<f64> {
        self.exact_mean_reward_with_budget(action, DEFAULT_ENUMERATION_BUDGET)
    }

    /// Exact `E[Y | do(action)]`.
    ///
    /// Enumerates joint values of the non-intervened ancestors of `Pa_Y` in
    /// the mutilated graph, in topological order, and averages the reward
    /// means weighted by the chain-rule probability of each configuration.
    pub fn exact_mean_reward_with_budget(&self, action: &Action, budget: u128) -> Result<f64> {
        action.validate(self.n(), self.cardinality)?;
        let n = self.n();
        let mut x = vec![0usize; n];
        for (node, v) in action.assignments() {
            x[node] = v;
        }
        let mut relevant = vec![false; n];
        let mut stack: Vec<usize> = self.reward.parents.clone();
        while let Some(v) = stack.pop() {
            if relevant[v] || x[v] != 0 {
                continue;
            }
            relevant[v] = true;
            stack.extend_from_slice(self.graph.parents(v));
        }
        let free: Vec<usize> = self
            .graph
            .topological_order()
            .iter()
            .copied()
            .filter(|&v| relevant[v])
            .collect();
        let states = crate::combinatorics::checked_pow(self.cardinality as u64, free.len() as u64).unwrap_or(u128::MAX);
        if states > budget {
            return Err(Error::BudgetExceeded { states, budget });
        }
        Ok(self.enumerate(&free, 1.0, &mut x))
    }

    fn enumerate(&self, free: &[usize], prob: f64, x: &mut [usize]) -> f64 {
        let l = self.cardinality;
        let Some((&v, rest)) = free.split_first() else {
            return prob * self.reward.mean_at(x, l);
        };
        let config = config_rank(self.graph.parents(v).iter().map(|&p| x[p]), l);
        let row = self.cpts[v].row(config);
        let mut total = 0.0;
        for (i, &p) in row.iter().enumerate() {
            if p > 0.0 {
                x[v] = i + 1;
                total += self.enumerate(rest, prob * p, x);
            }
        }
        x[v] = 0;
        total
    }

    /// Loads an instance from its JSON file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Writes the instance as pretty-printed JSON.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// On-disk schema of an [`Instance`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct InstanceFile {
    n: usize,
    cardinality: usize,
    /// Parent list of every node.
    parents: Vec<Vec<usize>>,
    /// Per node, one probability row per parent configuration rank.
    cpts: Vec<Vec<Vec<f64>>>,
    reward: RewardFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RewardFile {
    kind: RewardKind,
    parents: Vec<usize>,
    /// Mean reward keyed by parent configuration rank.
    means: BTreeMap<usize, f64>,
}

impl From<Instance> for InstanceFile {
    fn from(inst: Instance) -> Self {
        InstanceFile {
            n: inst.n(),
            cardinality: inst.cardinality,
            parents: inst.graph.parents.clone(),
            cpts: inst.cpts.into_iter().map(|c| c.rows).collect(),
            reward: RewardFile {
                kind: inst.reward.kind,
                parents: inst.reward.parents,
                means: inst.reward.means.into_iter().enumerate().collect(),
            },
        }
    }
}

impl TryFrom<InstanceFile> for Instance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        if file.parents.len() != file.n {
            return Err(Error::InvalidInstance(format!(
                "n = {} but {} parent lists",
                file.n,
                file.parents.len()
            )));
        }
        let graph = CausalGraph::new(file.parents)?;
        let cpts = file
            .cpts
            .into_iter()
            .map(|rows| CategoricalCpt::new(file.cardinality, rows))
            .collect::<Result<Vec<_>>>()?;
        let count = file.reward.means.len();
        if file.reward.means.keys().copied().ne(0..count) {
            return Err(Error::InvalidInstance(
                "reward means must be keyed by every configuration rank".into(),
            ));
        }
        let reward = RewardModel::new(
            file.reward.kind,
            file.reward.parents,
            file.reward.means.into_values().collect(),
        )?;
        Instance::new(graph, file.cardinality, cpts, reward)
    }
}

/// A draw from `Dirichlet(1, ..., 1)` of dimension `l`.
fn dirichlet_ones<R: Rng + ?Sized>(l: usize, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..l).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= sum);
    v
}

/// Knobs of the random instance generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub n: usize,
    pub cardinality: usize,
    pub k: usize,
    pub edge_prob: f64,
    pub beta: f64,
    pub reward_kind: RewardKind,
}

impl GeneratorParams {
    /// Erdős–Rényi with `p = 2/n`, `beta = 0.7`, Bernoulli reward.
    pub fn with_defaults(n: usize, cardinality: usize, k: usize) -> Self {
        GeneratorParams {
            n,
            cardinality,
            k,
            edge_prob: (2.0 / n as f64).min(1.0),
            beta: 0.7,
            reward_kind: RewardKind::Bernoulli,
        }
    }
}

/// Random instance: ER DAG oriented along a random permutation, Dirichlet
/// CPTs mixed with strength `beta`, uniformly drawn `Pa_Y` and reward means.
pub fn generate_random_instance<R: Rng + ?Sized>(params: &GeneratorParams, rng: &mut R) -> Result<Instance> {
    let GeneratorParams {
        n,
        cardinality: l,
        k,
        edge_prob,
        beta,
        reward_kind,
    } = *params;
    if n == 0 || k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= n, got n = {n}, k = {k}"
        )));
    }
    if l == 0 {
        return Err(Error::InvalidParameter("cardinality must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidParameter(format!("edge_prob {edge_prob} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidParameter(format!("beta {beta} outside [0, 1]")));
    }

    let mut perm: Vec<usize> = (0..n).collect();
    rand::seq::SliceRandom::shuffle(perm.as_mut_slice(), rng);
    let mut parents = vec![Vec::new(); n];
    for a in 0..n {
        for b in a + 1..n {
            if rng.random::<f64>() < edge_prob {
                parents[perm[b]].push(perm[a]);
            }
        }
    }
    let graph = CausalGraph::new(parents)?;

    let mut pa_y = index::sample(rng, n, k).into_vec();
    pa_y.sort_unstable();

    let mut cpts = Vec::with_capacity(n);
    for v in 0..n {
        let base = dirichlet_ones(l, rng);
        let rows = (0..l.pow(graph.parents(v).len() as u32))
            .map(|_| {
                let u = dirichlet_ones(l, rng);
                base.iter().zip(&u).map(|(b, u)| (1.0 - beta) * b + beta * u).collect()
            })
            .collect();
        cpts.push(CategoricalCpt::new(l, rows)?);
    }

    let means = (0..l.pow(k as u32)).map(|_| rng.random::<f64>()).collect();
    let reward = RewardModel::new(reward_kind, pa_y, means)?;
    Instance::new(graph, l, cpts, reward)
}

const NEUTRAL: usize = 1;
const ACTIVE: usize = 2;

/// The instance `V_p` of the identification/regret trade-off family.
///
/// Binary variables with value 1 as "off" and 2 as "on". Nodes `0..k` are
/// roots fixed to 1; every other node is on iff all of `0..k` are on. The
/// reward is `N(1, 1)` when every node of `p` is on and `N(0, 1)` otherwise.
pub fn build_tradeoff_instance(n: usize, k: usize, p: &[usize]) -> Result<Instance> {
    if p.len() != k || k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "parent set {p:?} must have size k = {k} <= n = {n}"
        )));
    }
    let l = 2;
    let mut parents = vec![Vec::new(); n];
    let mut cpts = Vec::with_capacity(n);
    for (v, ps) in parents.iter_mut().enumerate() {
        if v < k {
            cpts.push(CategoricalCpt::constant(l, 1, NEUTRAL));
        } else {
            *ps = (0..k).collect();
            let rows = 1usize << k;
            let mut cpt = CategoricalCpt::constant(l, rows, NEUTRAL);
            cpt.rows[rows - 1] = CategoricalCpt::constant(l, 1, ACTIVE).rows.remove(0);
            cpts.push(cpt);
        }
    }
    let graph = CausalGraph::new(parents)?;
    let mut means = vec![0.0; 1 << k];
    means[(1 << k) - 1] = 1.0;
    let reward = RewardModel::new(RewardKind::Gaussian, p.to_vec(), means)?;
    if reward.parents().len() != k || reward.parents().iter().any(|&v| v >= n) {
        return Err(Error::InvalidParameter(format!("invalid parent set {p:?}")));
    }
    Instance::new(graph, l, cpts, reward)
}

/// Empty graph, every variable constantly 1, reward `N(0, 1)`; `Pa_Y = 0..k`.
pub fn build_neutral_instance(n: usize, l: usize, k: usize) -> Result<Instance> {
    let p: Vec<usize> = (0..k).collect();
    constant_instance(n, l, &p, vec![0.0; l.pow(k as u32)])
}

/// The neutral instance with the reward mean raised to `delta` exactly when
/// `X_p = s`.
pub fn build_perturbed_instance(
    n: usize,
    l: usize,
    k: usize,
    p: &[usize],
    s: &[usize],
    delta: f64,
) -> Result<Instance> {
    if p.len() != k || s.len() != k {
        return Err(Error::InvalidParameter(format!("p and s must have length k = {k}")));
    }
    if delta.is_nan() || delta <= 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("gap {delta} must be positive")));
    }
    let target = Action::new(p.to_vec(), s.to_vec())?;
    target.validate(n, l)?;
    let mut means = vec![0.0; l.pow(k as u32)];
    means[config_rank(target.values().iter().copied(), l)] = delta;
    constant_instance(n, l, target.nodes(), means)
}

fn constant_instance(n: usize, l: usize, p: &[usize], means: Vec<f64>) -> Result<Instance> {
    if l == 0 || p.len() > n || p.iter().any(|&v| v >= n) {
        return Err(Error::InvalidParameter(format!("invalid parent set {p:?} for n = {n}")));
    }
    let cpts = (0..n).map(|_| CategoricalCpt::constant(l, 1, 1)).collect();
    let reward = RewardModel::new(RewardKind::Gaussian, p.to_vec(), means)?;
    Instance::new(CausalGraph::empty(n), l, cpts, reward)
}

/// Best exact mean over all actions of size `<= m`, and over `A_m` alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumPair {
    pub best_overall: f64,
    pub best_at_max_size: f64,
}

/// Exhaustive evaluation of every action of size at most `m`.
pub fn brute_force_optimal(instance: &Instance, m: usize) -> Result<OptimumPair> {
    brute_force_optimal_with_budget(instance, m, DEFAULT_ENUMERATION_BUDGET)
}

pub fn brute_force_optimal_with_budget(instance: &Instance, m: usize, budget: u128) -> Result<OptimumPair> {
    let (n, l) = (instance.n(), instance.cardinality());
    if m > n {
        return Err(Error::InvalidParameter(format!("m = {m} exceeds n = {n}")));
    }
    let total = (0..=m).try_fold(0u128, |acc, i| -> Result<u128> {
        Ok(acc.saturating_add(action_count(n, i, l)?))
    })?;
    if total > budget {
        return Err(Error::BudgetExceeded { states: total, budget });
    }
    let mut best_overall = f64::NEG_INFINITY;
    let mut best_at_max_size = f64::NEG_INFINITY;
    for size in 0..=m {
        for r in 0..action_count(n, size, l)? {
            let mu = instance.exact_mean_reward_with_budget(&unrank_action(r, n, size, l)?, budget)?;
            best_overall = best_overall.max(mu);
            if size == m {
                best_at_max_size = best_at_max_size.max(mu);
            }
        }
    }
    Ok(OptimumPair {
        best_overall,
        best_at_max_size,
    })
}

/// Exact means of every action of `A_m`, indexed by action rank.
pub fn action_means(instance: &Instance, m: usize, budget: u128) -> Result<Vec<f64>> {
    let (n, l) = (instance.n(), instance.cardinality());
    let count = action_count(n, m, l)?;
    if count > budget {
        return Err(Error::BudgetExceeded { states: count, budget });
    }
    (0..count)
        .map(|r| instance.exact_mean_reward_with_budget(&unrank_action(r, n, m, l)?, budget))
        .collect()
}

/// Number of actions in `A_m` whose exact mean is within `tol` of the best.
pub fn count_optimal_actions(instance: &Instance, m: usize, tol: f64) -> Result<usize> {
    let means = action_means(instance, m, DEFAULT_ENUMERATION_BUDGET)?;
    let best = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(means.iter().filter(|&&mu| best - mu <= tol).count())
}

/// Monte-Carlo estimate of `E[Y | do(action)]`: `(mean, standard error)`.
pub fn monte_carlo_mean<R: Rng + ?Sized>(
    instance: &Instance,
    action: &Action,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    action.validate(instance.n(), instance.cardinality())?;
    if samples < 2 {
        return Err(Error::InvalidParameter("need at least two samples".into()));
    }
    let mut x = vec![0; instance.n()];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..samples {
        let y = instance.sample_into(action, rng, &mut x);
        sum += y;
        sum_sq += y * y;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}
