//! Exact binomials and bijections between integers and intervention actions.
//!
//! Subsets of `{0..n}` are ordered lexicographically as sorted index lists.
//! An action on `m` nodes with cardinality `l` is ranked as
//! `subset_rank * l^m + value_code`, where `value_code` is the base-`l`
//! encoding of the (1-based) assigned values, most significant digit first,
//! aligned with the sorted node list.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An intervention `do(X_nodes = values)`.
///
/// `nodes` are 0-based, strictly increasing. `values` are 1-based, one per node.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Action {
    nodes: Vec<usize>,
    values: Vec<usize>,
}

impl Action {
    /// Builds an action, sorting the pairs by node index.
    pub fn new(nodes: Vec<usize>, values: Vec<usize>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::InvalidAction(format!(
                "{} nodes but {} values",
                nodes.len(),
                values.len()
            )));
        }
        let mut pairs: Vec<(usize, usize)> = nodes.into_iter().zip(values).collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidAction("duplicate node".into()));
        }
        if pairs.iter().any(|&(_, v)| v == 0) {
            return Err(Error::InvalidAction("values are 1-based".into()));
        }
        let (nodes, values) = pairs.into_iter().unzip();
        Ok(Action { nodes, values })
    }

    /// The observational (empty) intervention.
    pub fn empty() -> Self {
        Action {
            nodes: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Iterates `(node, value)` pairs in node order.
    pub fn assignments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nodes.iter().copied().zip(self.values.iter().copied())
    }

    /// Checks that every node is `< n` and every value is in `1..=l`.
    pub fn validate(&self, n: usize, l: usize) -> Result<()> {
        if let Some(&node) = self.nodes.last() {
            if node >= n {
                return Err(Error::InvalidAction(format!(
                    "node index {node} out of range for n = {n}"
                )));
            }
        }
        if let Some(&v) = self.values.iter().find(|&&v| v == 0 || v > l) {
            return Err(Error::InvalidAction(format!("value {v} outside 1..={l}")));
        }
        Ok(())
    }

    /// True iff `x` agrees with this action on every intervened node.
    pub fn matches(&self, x: &[usize]) -> bool {
        self.assignments().all(|(node, v)| x[node] == v)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "do(")?;
        for (i, (node, v)) in self.assignments().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "X{}={}", node + 1, v)?;
        }
        write!(f, ")")
    }
}

/// `true` iff `x` restricted to the action's nodes equals its values.
pub fn action_matches(action: &Action, x: &[usize]) -> bool {
    action.matches(x)
}

/// Exact `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) / i stays integral at every step
        let factor = n as u128 - k as u128 + i;
        let g = gcd(acc, i);
        let (a, d) = (acc / g, i / g);
        let f = factor / d;
        acc = a
            .checked_mul(f)
            .ok_or_else(|| Error::Overflow(format!("C({n}, {k})")))?;
    }
    Ok(acc)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `l^e` with overflow checking.
pub fn checked_pow(l: u64, e: u64) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc
            .checked_mul(l as u128)
            .ok_or_else(|| Error::Overflow(format!("{l}^{e}")))?;
    }
    Ok(acc)
}

/// `|A_m| = C(n, m) * l^m`.
pub fn action_count(n: usize, m: usize, l: usize) -> Result<u128> {
    binomial(n as u64, m as u64)?
        .checked_mul(checked_pow(l as u64, m as u64)?)
        .ok_or_else(|| Error::Overflow(format!("|A_{m}| for n = {n}, l = {l}")))
}

/// Lexicographic subset rank together with its population and subset sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubsetRank {
    pub rank: u128,
    pub n: usize,
    pub k: usize,
}

impl SubsetRank {
    pub fn new(rank: u128, n: usize, k: usize) -> Result<Self> {
        let size = binomial(n as u64, k as u64)?;
        if rank >= size {
            return Err(Error::RankOutOfRange { rank, size });
        }
        Ok(SubsetRank { rank, n, k })
    }

    pub fn unrank(self) -> Vec<usize> {
        unrank_subset(self.rank, self.n, self.k).expect("validated at construction")
    }
}

/// The `rank`-th `k`-subset of `{0..n}` in lexicographic order (0-based indices).
pub fn unrank_subset(rank: u128, n: usize, k: usize) -> Result<Vec<usize>> {
    let size = binomial(n as u64, k as u64)?;
    if rank >= size {
        return Err(Error::RankOutOfRange { rank, size });
    }
    let mut rest = rank;
    let mut out = Vec::with_capacity(k);
    let mut next = 0usize;
    for i in 0..k {
        let mut c = next;
        loop {
            let block = binomial((n - c - 1) as u64, (k - i - 1) as u64)?;
            if rest < block {
                out.push(c);
                next = c + 1;
                break;
            }
            rest -= block;
            c += 1;
        }
    }
    Ok(out)
}

/// Inverse of [`unrank_subset`]. `subset` must be strictly increasing and `< n`.
pub fn rank_subset(subset: &[usize], n: usize) -> Result<u128> {
    if subset.windows(2).any(|w| w[0] >= w[1]) || subset.last().is_some_and(|&x| x >= n) {
        return Err(Error::InvalidAction(format!(
            "{subset:?} is not a sorted subset of 0..{n}"
        )));
    }
    let k = subset.len();
    let mut rank = 0u128;
    let mut start = 0usize;
    for (i, &c) in subset.iter().enumerate() {
        for j in start..c {
            rank += binomial((n - j - 1) as u64, (k - i - 1) as u64)?;
        }
        start = c + 1;
    }
    Ok(rank)
}

/// The `rank`-th action of `A_m` for `n` nodes of cardinality `l`.
pub fn unrank_action(rank: u128, n: usize, m: usize, l: usize) -> Result<Action> {
    let size = action_count(n, m, l)?;
    if rank >= size {
        return Err(Error::RankOutOfRange { rank, size });
    }
    let per_subset = checked_pow(l as u64, m as u64)?;
    let nodes = unrank_subset(rank / per_subset, n, m)?;
    let mut code = rank % per_subset;
    let mut values = vec![0usize; m];
    for slot in values.iter_mut().rev() {
        *slot = (code % l as u128) as usize + 1;
        code /= l as u128;
    }
    Ok(Action { nodes, values })
}

/// Inverse of [`unrank_action`].
pub fn rank_action(action: &Action, n: usize, l: usize) -> Result<u128> {
    action.validate(n, l)?;
    let m = action.len();
    let subset = rank_subset(action.nodes(), n)?;
    let code = action
        .values()
        .iter()
        .fold(0u128, |acc, &v| acc * l as u128 + (v - 1) as u128);
    Ok(subset * checked_pow(l as u64, m as u64)? + code)
}

/// Base-`l`, most-significant-first rank of a 1-based value configuration.
pub fn config_rank(values: impl IntoIterator<Item = usize>, l: usize) -> usize {
    values.into_iter().fold(0, |acc, v| acc * l + (v - 1))
}

/// Inverse of [`config_rank`] for a configuration of `len` values.
pub fn config_unrank(mut rank: usize, len: usize, l: usize) -> Vec<usize> {
    let mut values = vec![0; len];
    for slot in values.iter_mut().rev() {
        *slot = rank % l + 1;
        rank /= l;
    }
    values
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(8, 3).unwrap(), 56);
        assert_eq!(binomial(5, 0).unwrap(), 1);
        assert_eq!(binomial(3, 7).unwrap(), 0);
        assert_eq!(binomial(0, 0).unwrap(), 1);
        assert_eq!(binomial(62, 31).unwrap(), 465_428_353_255_261_088);
    }

    #[test]
    fn binomial_overflow_is_an_error() {
        assert!(matches!(binomial(200, 100), Err(Error::Overflow(_))));
        assert!(binomial(130, 65).is_ok());
    }

    #[test]
    fn pascal_rule_up_to_64() {
        for n in 1..=64u64 {
            for k in 1..=n {
                assert_eq!(
                    binomial(n, k).unwrap(),
                    binomial(n - 1, k - 1).unwrap() + binomial(n - 1, k).unwrap()
                );
            }
        }
    }

    fn lex_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
        // independent enumeration: filter all bitmasks, then sort lexicographically
        let mut out: Vec<Vec<usize>> = (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
            .collect();
        out.sort();
        out
    }

    #[test]
    fn unrank_subset_examples() {
        // 1-based [1,2], [3,4], [6,7,8]
        assert_eq!(unrank_subset(0, 4, 2).unwrap(), vec![0, 1]);
        assert_eq!(unrank_subset(5, 4, 2).unwrap(), vec![2, 3]);
        assert_eq!(unrank_subset(55, 8, 3).unwrap(), vec![5, 6, 7]);
        assert!(matches!(
            unrank_subset(56, 8, 3),
            Err(Error::RankOutOfRange { rank: 56, size: 56 })
        ));
    }

    #[test]
    fn unrank_subset_matches_enumeration() {
        for n in 0..=9 {
            for k in 0..=n {
                let expected = lex_subsets(n, k);
                for (r, subset) in expected.iter().enumerate() {
                    assert_eq!(&unrank_subset(r as u128, n, k).unwrap(), subset);
                    assert_eq!(rank_subset(subset, n).unwrap(), r as u128);
                }
            }
        }
    }

    #[test]
    fn unrank_action_examples() {
        let a = unrank_action(0, 4, 2, 2).unwrap();
        assert_eq!((a.nodes(), a.values()), (&[0, 1][..], &[1, 1][..]));
        let a = unrank_action(3, 4, 2, 2).unwrap();
        assert_eq!((a.nodes(), a.values()), (&[0, 1][..], &[2, 2][..]));
        assert!(unrank_action(24, 4, 2, 2).is_err());
    }

    #[test]
    fn action_round_trip_exhaustive() {
        for &(n, m, l) in &[(8, 3, 3), (5, 2, 4), (6, 6, 2), (7, 0, 3), (4, 1, 5)] {
            let size = action_count(n, m, l).unwrap();
            let mut per_subset = std::collections::HashMap::new();
            for r in 0..size {
                let a = unrank_action(r, n, m, l).unwrap();
                assert_eq!(rank_action(&a, n, l).unwrap(), r);
                *per_subset.entry(a.nodes().to_vec()).or_insert(0u128) += 1;
            }
            assert!(per_subset
                .values()
                .all(|&c| c == checked_pow(l as u64, m as u64).unwrap()));
        }
        assert_eq!(action_count(8, 3, 3).unwrap(), 1512);
    }

    #[test]
    fn matching_predicate() {
        // 1-based (p=[1,3], s=[2,1])
        let a = Action::new(vec![0, 2], vec![2, 1]).unwrap();
        assert!(action_matches(&a, &[2, 3, 1, 1]));
        assert!(!action_matches(&a, &[1, 3, 1, 1]));
        assert!(action_matches(&Action::empty(), &[3, 3, 2, 1]));
    }

    #[test]
    fn action_new_sorts_and_rejects_bad_input() {
        let a = Action::new(vec![3, 1], vec![1, 2]).unwrap();
        assert_eq!(a.nodes(), &[1, 3]);
        assert_eq!(a.values(), &[2, 1]);
        assert!(Action::new(vec![1, 1], vec![1, 2]).is_err());
        assert!(Action::new(vec![1], vec![0]).is_err());
        assert!(Action::new(vec![1], vec![]).is_err());
        assert!(a.validate(4, 2).is_ok());
        assert!(a.validate(3, 2).is_err());
        assert!(a.validate(4, 1).is_err());
    }

    #[test]
    fn config_rank_round_trip() {
        for r in 0..81 {
            let v = config_unrank(r, 4, 3);
            assert_eq!(config_rank(v.iter().copied(), 3), r);
        }
        assert_eq!(config_unrank(5, 3, 2), vec![2, 1, 2]);
    }
}
