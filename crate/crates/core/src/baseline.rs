//! Comparison methods: classical failure-free bounds, the normal-approximation
//! power calculation used for claims with failures, and conjugate Beta priors.

use serde::{Deserialize, Serialize};

use crate::cbi::{Observation, ReliabilityClaim, MILES_LIMIT};
use crate::error::{Error, Result};
use crate::root::{bisect, bracket_upward, Tolerance};
use crate::special::{beta_reg, std_normal_quantile};

/// `Beta(a, b)` prior on the per-mile failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub a: f64,
    pub b: f64,
}

impl BetaPrior {
    pub const UNIFORM: BetaPrior = BetaPrior { a: 1.0, b: 1.0 };
    pub const JEFFREYS: BetaPrior = BetaPrior { a: 0.5, b: 0.5 };

    pub fn new(a: f64, b: f64) -> Result<Self> {
        let prior = Self { a, b };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidPrior(format!(
                "Beta shapes must be positive, got ({}, {})",
                self.a, self.b
            )))
        }
    }

    /// Shapes of the posterior after `obs`.
    pub fn posterior(&self, obs: &Observation) -> (f64, f64) {
        let k = obs.k as f64;
        (self.a + k, self.b + obs.n - k)
    }
}

/// Failure-free miles after which, were the rate at least `p`, seeing no
/// failure would have probability at most `1 - c`.
pub fn classical_failure_free_miles(claim: &ReliabilityClaim) -> Result<f64> {
    claim.validate()?;
    if claim.p >= 1.0 {
        return Err(Error::InvalidClaim("classical bound needs p < 1".into()));
    }
    Ok((1.0 - claim.c).ln() / (-claim.p).ln_1p())
}

/// Miles for a one-sided normal-approximation test to separate `bound` from
/// `true_rate` at confidence `c`: `z^2 true_rate / (bound - true_rate)^2`.
pub fn rand_power_miles(true_rate: f64, bound: f64, c: f64) -> Result<f64> {
    if !(true_rate > 0.0 && bound > true_rate && bound <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < true_rate < bound <= 1, got {true_rate:e}, {bound:e}"
        )));
    }
    let z = std_normal_quantile(c)?;
    let margin = bound - true_rate;
    Ok(z * z * true_rate / (margin * margin))
}

/// Posterior `Pr(X <= p | k, n)` under a Beta prior: `I_p(a + k, b + n - k)`.
pub fn beta_posterior_confidence(prior: &BetaPrior, obs: &Observation, p: f64) -> Result<f64> {
    prior.validate()?;
    obs.validate()?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidClaim(format!("bound p must lie in [0, 1], got {p}")));
    }
    let (a, b) = prior.posterior(obs);
    beta_reg(a, b, p)
}

/// Smallest `n >= k` at which the Beta posterior supports `claim`.
pub fn beta_required_miles(prior: &BetaPrior, k: u64, claim: &ReliabilityClaim) -> Result<f64> {
    beta_required_miles_with(prior, k, claim, Tolerance::default())
}

pub fn beta_required_miles_with(
    prior: &BetaPrior,
    k: u64,
    claim: &ReliabilityClaim,
    tol: Tolerance,
) -> Result<f64> {
    prior.validate()?;
    claim.validate()?;
    let kf = k as f64;
    let mut failure = None;
    let mut supported = |n: f64| match beta_posterior_confidence(prior, &Observation { k, n }, claim.p) {
        Ok(conf) => conf >= claim.c,
        Err(e) => {
            failure.get_or_insert(e);
            false
        }
    };
    if supported(kf) {
        return Ok(kf);
    }
    let bracket = bracket_upward(&mut supported, kf, 2.0, MILES_LIMIT);
    let Some((lo, hi)) = bracket else {
        return Err(failure.unwrap_or_else(|| {
            Error::Unsatisfiable(format!(
                "Beta({}, {}) posterior never reaches {} in p = {:e}",
                prior.a, prior.b, claim.c, claim.p
            ))
        }));
    };
    let n = bisect(&mut supported, lo, hi, tol);
    match failure {
        Some(e) => Err(e),
        None => Ok(n),
    }
}
