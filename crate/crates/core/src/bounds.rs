//! Closed-form regret rates and sampling quantities.
//!
//! All rates are reported without their hidden constants and logarithmic
//! factors; they are meant for overlays and ratio checks, not as absolute
//! regret predictions.

use num_rational::Ratio;
use serde::Serialize;

use crate::combinatorics::{binomial, checked_pow};
use crate::error::{Error, Result};

/// Caveat attached to every reported rate.
pub const RATE_CAVEAT: &str = "rate only: constants and logarithmic factors omitted";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `m >= k`
    #[serde(rename = "m>=k")]
    Covering,
    /// `m < k`
    #[serde(rename = "m<k")]
    Partial,
}

impl Regime {
    pub fn of(k: usize, m: usize) -> Self {
        if m >= k {
            Regime::Covering
        } else {
            Regime::Partial
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Covering => "m>=k",
            Regime::Partial => "m<k",
        }
    }
}

fn c(n: usize, k: usize) -> Result<f64> {
    Ok(binomial(n as u64, k as u64)? as f64)
}

fn check(n: usize, l: usize, k: usize, m: usize) -> Result<()> {
    if l < 2 {
        return Err(Error::InvalidParameter(format!("cardinality {l} < 2")));
    }
    if k > n || m == 0 || m > n {
        return Err(Error::InvalidParameter(format!(
            "need k <= n and 1 <= m <= n, got n = {n}, k = {k}, m = {m}"
        )));
    }
    Ok(())
}

/// Lower-bound rate for a learner that knows `k`.
pub fn lb_known_k(n: usize, l: usize, k: usize, m: usize, horizon: u64) -> Result<f64> {
    check(n, l, k, m)?;
    let lf = l as f64;
    let t = horizon as f64;
    let inner = match Regime::of(k, m) {
        Regime::Covering => ((lf - 1.0).powi(k as i32) * c(n, k)? / c(m, k)?).max(lf.powi(k as i32)),
        Regime::Partial => ((lf - 1.0).powi(m as i32) * c(n, m)?).max(lf.powi(m as i32)),
    };
    Ok((t * inner).sqrt())
}

/// Upper-bound rate of the known-`k` subset-sampling policy.
pub fn ub_alg1(n: usize, l: usize, k: usize, m: usize, horizon: u64) -> Result<f64> {
    check(n, l, k, m)?;
    let lf = l as f64;
    let t = horizon as f64;
    let inner = match Regime::of(k, m) {
        Regime::Covering => lf.powi(k as i32) * c(n, k)? / c(m, k)?,
        Regime::Partial => lf.powi(m as i32) * c(n, m)?,
    };
    Ok((t * inner).sqrt())
}

/// Upper-bound rate of the phased mixture-arm policy.
pub fn ub_alg2(n: usize, l: usize, k: usize, m: usize, horizon: u64) -> Result<f64> {
    check(n, l, k, m)?;
    let lf = l as f64;
    let lead = (horizon as f64 * m as f64 / n as f64).sqrt();
    Ok(match Regime::of(k, m) {
        Regime::Covering => lead * lf.powf(k as f64 - 0.5) * c(n, k)? / c(m, k)?,
        Regime::Partial => lead * lf.powf(m as f64 - 0.5) * c(n, m)?,
    })
}

/// Lower bound on the product of worst-case regrets at `k1 < k2`.
pub fn lb_product_unknown(n: usize, l: usize, k1: usize, k2: usize, m: usize, horizon: u64) -> Result<f64> {
    if !(k1 < k2 && k2 <= m && m <= n) {
        return Err(Error::InvalidParameter(format!(
            "need k1 < k2 <= m <= n, got k1 = {k1}, k2 = {k2}, m = {m}, n = {n}"
        )));
    }
    if l < 2 {
        return Err(Error::InvalidParameter(format!("cardinality {l} < 2")));
    }
    let lf = l as f64;
    let d = k2 - k1;
    let term = (lf - 1.0).powi(k2 as i32) * c(n - k1, d)? / c(m - k1, d)?;
    Ok(horizon as f64 * term.max(lf.powi(k2 as i32)))
}

/// Fraction of optimal arms in `A_m` when `|Pa_Y| = k`, as an exact ratio.
pub fn alpha_k(n: usize, l: usize, k: usize, m: usize) -> Result<Ratio<u128>> {
    if m > n || k > n {
        return Err(Error::InvalidParameter(format!(
            "need k, m <= n, got n = {n}, k = {k}, m = {m}"
        )));
    }
    let (num, den) = match Regime::of(k, m) {
        Regime::Covering => (
            binomial(m as u64, k as u64)?,
            checked_pow(l as u64, k as u64)?
                .checked_mul(binomial(n as u64, k as u64)?)
                .ok_or_else(|| Error::Overflow("alpha_k denominator".into()))?,
        ),
        Regime::Partial => (
            1,
            checked_pow(l as u64, m as u64)?
                .checked_mul(binomial(n as u64, m as u64)?)
                .ok_or_else(|| Error::Overflow("alpha_k denominator".into()))?,
        ),
    };
    Ok(Ratio::new(num, den))
}

pub fn ratio_to_f64(r: &Ratio<u128>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// `N_k = ln(sqrt(T)) / alpha_k`: random arms needed to hit an optimum
/// with probability at least `1 - 1/sqrt(T)`.
pub fn n_k(n: usize, l: usize, k: usize, m: usize, horizon: u64) -> Result<f64> {
    let alpha = alpha_k(n, l, k, m)?;
    Ok((horizon as f64).sqrt().ln() * *alpha.denom() as f64 / *alpha.numer() as f64)
}

/// All rates for one parameter tuple.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub n: usize,
    pub l: usize,
    pub k: usize,
    pub m: usize,
    #[serde(rename = "T")]
    pub horizon: u64,
    pub regime: Regime,
    pub lb_known_k: f64,
    pub ub_alg1: f64,
    pub ub_alg2: f64,
    pub alpha_k: f64,
    pub n_k: f64,
    pub caveat: &'static str,
}

impl BoundReport {
    pub fn new(n: usize, l: usize, k: usize, m: usize, horizon: u64) -> Result<Self> {
        Ok(BoundReport {
            n,
            l,
            k,
            m,
            horizon,
            regime: Regime::of(k, m),
            lb_known_k: lb_known_k(n, l, k, m, horizon)?,
            ub_alg1: ub_alg1(n, l, k, m, horizon)?,
            ub_alg2: ub_alg2(n, l, k, m, horizon)?,
            alpha_k: ratio_to_f64(&alpha_k(n, l, k, m)?),
            n_k: n_k(n, l, k, m, horizon)?,
            caveat: RATE_CAVEAT,
        })
    }
}
