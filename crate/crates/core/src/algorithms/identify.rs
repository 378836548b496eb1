//! Parent identification by uniform sampling over `A_k`.

use rand::Rng;

use crate::combinatorics::{action_count, unrank_action};
use crate::error::{Error, Result};
use crate::scm::Instance;

/// Splits `horizon` pulls over `arms` arms as evenly as possible; the
/// remainder goes to the lowest ranks.
pub fn uniform_pull_counts(horizon: u64, arms: u64) -> Result<Vec<u64>> {
    if arms == 0 || horizon < arms {
        return Err(Error::InvalidParameter(format!(
            "T = {horizon} cannot pull each of {arms} arms once"
        )));
    }
    let (base, extra) = (horizon / arms, horizon % arms);
    Ok((0..arms).map(|r| base + u64::from(r < extra)).collect())
}

/// Plays every action of `A_k` equally often, then returns the subset of
/// the lowest-ranked action whose empirical mean exceeds 1/2 and whose
/// subset is not `{0, .., k-1}`; if there is none, returns `{0, .., k-1}`.
pub fn identify_parents_unif<R: Rng + ?Sized>(
    instance: &Instance,
    k: usize,
    horizon: u64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let (n, l) = (instance.n(), instance.cardinality());
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    let arms = action_count(n, k, l)?;
    let arms = u64::try_from(arms).map_err(|_| Error::Overflow(format!("|A_k| = {arms}")))?;
    let pulls = uniform_pull_counts(horizon, arms)?;
    let default: Vec<usize> = (0..k).collect();
    let mut x = vec![0; n];
    let mut answer = None;
    for (r, &count) in pulls.iter().enumerate() {
        let action = unrank_action(r as u128, n, k, l)?;
        let mut sum = 0.0;
        for _ in 0..count {
            sum += instance.sample_into(&action, rng, &mut x);
        }
        if answer.is_none() && sum / count as f64 > 0.5 && action.nodes() != default.as_slice() {
            answer = Some(action.nodes().to_vec());
        }
    }
    Ok(answer.unwrap_or(default))
}
