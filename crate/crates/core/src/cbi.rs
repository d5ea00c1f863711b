//! Worst-case posterior confidence under partial prior knowledge.
//!
//! The assessor states only that the per-mile failure probability `X`
//! satisfies `Pr(X <= epsilon) = theta` and `Pr(X >= p_l) = 1`. Among all
//! priors meeting those constraints, the one minimising `Pr(X <= p | k, n)`
//! puts mass `theta` at `x1` and `1 - theta` at `x3`, where
//!
//! * `x1` minimises the likelihood kernel `x^k (1-x)^(n-k)` over `{p_l, epsilon}`
//!   (ties go to `epsilon`), and
//! * `x3` maximises it over `(p, 1]`: `p` itself if `k/n <= p`, else `k/n`.
//!
//! Everything is evaluated in log space since `(1 - p)^n` underflows long
//! before the mileages of interest (n ~ 1e10 .. 1e15).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::root::{bisect, bracket_upward, Tolerance};
use crate::special::{ln_bernoulli_kernel, logistic_of_neg};

/// Largest probability probed when searching for a supportable claim.
pub const CLAIM_SEARCH_CEILING: f64 = 1.0 - 1e-12;
/// Mileages above this are reported as divergent.
pub const MILES_LIMIT: f64 = 1e18;

/// Partial prior knowledge: `Pr(X <= epsilon) = theta`, `Pr(X >= p_l) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorConstraints {
    /// Engineering goal (failure probability per mile).
    pub epsilon: f64,
    /// Prior confidence that the goal is met.
    pub theta: f64,
    /// Technology floor: no feasible prior puts mass below it.
    pub p_l: f64,
}

impl PriorConstraints {
    pub fn new(epsilon: f64, theta: f64, p_l: f64) -> Result<Self> {
        let cs = Self { epsilon, theta, p_l };
        cs.validate()?;
        Ok(cs)
    }

    pub fn validate(&self) -> Result<()> {
        let Self { epsilon, theta, p_l } = *self;
        if !(p_l > 0.0 && p_l < epsilon && epsilon <= 1.0) {
            return Err(Error::InvalidConstraints(format!(
                "need 0 < p_l < epsilon <= 1, got p_l = {p_l:e}, epsilon = {epsilon:e}"
            )));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(Error::InvalidConstraints(format!(
                "need 0 < theta <= 1, got {theta}"
            )));
        }
        if epsilon == 1.0 && theta < 1.0 {
            return Err(Error::InvalidConstraints(
                "epsilon = 1 leaves no room for mass above the goal; theta must be 1".into(),
            ));
        }
        Ok(())
    }
}

/// Road-testing evidence: `k` failures in `n` miles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub k: u64,
    /// Miles driven; treated as a continuous quantity.
    pub n: f64,
}

impl Observation {
    pub fn new(k: u64, n: f64) -> Result<Self> {
        let obs = Self { k, n };
        obs.validate()?;
        Ok(obs)
    }

    pub fn failure_free(n: f64) -> Result<Self> {
        Self::new(0, n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n >= 0.0 && self.n.is_finite()) {
            return Err(Error::InvalidObservation(format!(
                "miles must be finite and non-negative, got {}",
                self.n
            )));
        }
        if self.k as f64 > self.n {
            return Err(Error::InvalidObservation(format!(
                "{} failures cannot occur in {} miles",
                self.k, self.n
            )));
        }
        Ok(())
    }

    /// Observed failure frequency `k/n`, defined as 0 when `n = 0`.
    pub fn frequency(&self) -> f64 {
        if self.n == 0.0 {
            0.0
        } else {
            self.k as f64 / self.n
        }
    }

    /// Log of the Bernoulli likelihood kernel at failure probability `x`.
    pub fn ln_kernel(&self, x: f64) -> f64 {
        ln_bernoulli_kernel(x, self.k as f64, self.n)
    }
}

/// A claim `Pr(X <= p) >= c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityClaim {
    pub p: f64,
    pub c: f64,
}

impl ReliabilityClaim {
    pub fn new(p: f64, c: f64) -> Result<Self> {
        let claim = Self { p, c };
        claim.validate()?;
        Ok(claim)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidClaim(format!(
                "bound p must lie in (0, 1], got {}",
                self.p
            )));
        }
        validate_confidence(self.c)
    }
}

pub(crate) fn validate_confidence(c: f64) -> Result<()> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidClaim(format!(
            "confidence must lie in (0, 1), got {c}"
        )));
    }
    Ok(())
}

/// The minimising prior: mass `theta` at `x1`, `1 - theta` at `x3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPointPrior {
    pub x1: f64,
    pub x3: f64,
    pub theta: f64,
}

/// Outcome of the two-step "compensate for one failure" calculation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompensationResult {
    /// Failure-free miles driven before the failure.
    pub n1: f64,
    /// Claim supported by those `n1` miles.
    pub p_supported: f64,
    /// Total miles needed to support the same claim after one failure.
    pub n_tilde: f64,
    /// Extra failure-free miles: `n_tilde - n1`.
    pub n2: f64,
}

fn check_inputs(cs: &PriorConstraints, obs: &Observation, p: f64) -> Result<()> {
    cs.validate()?;
    obs.validate()?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidClaim(format!(
            "bound p must lie in (0, 1], got {p}"
        )));
    }
    Ok(())
}

/// Chooses `x1` (lower mass point) for the given evidence.
fn lower_mass_point(cs: &PriorConstraints, obs: &Observation) -> f64 {
    if obs.ln_kernel(cs.p_l) < obs.ln_kernel(cs.epsilon) {
        cs.p_l
    } else {
        cs.epsilon
    }
}

/// The prior attaining the minimum posterior confidence in `X <= p`.
pub fn worst_case_prior(
    cs: &PriorConstraints,
    obs: &Observation,
    p: f64,
) -> Result<TwoPointPrior> {
    check_inputs(cs, obs, p)?;
    if p <= cs.epsilon {
        return Err(Error::ClaimBelowGoal {
            p,
            epsilon: cs.epsilon,
        });
    }
    let freq = obs.frequency();
    Ok(TwoPointPrior {
        x1: lower_mass_point(cs, obs),
        x3: if freq <= p { p } else { freq },
        theta: cs.theta,
    })
}

/// Smallest posterior confidence in `X <= p` over every prior meeting `cs`.
pub fn worst_case_posterior_confidence(
    cs: &PriorConstraints,
    obs: &Observation,
    p: f64,
) -> Result<f64> {
    check_inputs(cs, obs, p)?;
    if p <= cs.epsilon {
        return Ok(0.0);
    }
    let prior = worst_case_prior(cs, obs, p)?;
    Ok(two_point_confidence(&prior, obs))
}

/// Posterior confidence that `X <= x1` under a two-point prior, i.e. the
/// posterior mass of the lower point.
pub(crate) fn two_point_confidence(prior: &TwoPointPrior, obs: &Observation) -> f64 {
    let k = obs.k as f64;
    let survivors = obs.n - k;
    let mut log_odds = 0.0;
    if k > 0.0 {
        log_odds += k * (prior.x3.ln() - prior.x1.ln());
    }
    if survivors > 0.0 {
        log_odds += survivors * ((-prior.x3).ln_1p() - (-prior.x1).ln_1p());
    }
    log_odds += (1.0 - prior.theta).ln() - prior.theta.ln();
    logistic_of_neg(log_odds)
}

/// Smallest mileage `n >= k` at which `k` failures still support `claim`.
pub fn required_miles(cs: &PriorConstraints, k: u64, claim: &ReliabilityClaim) -> Result<f64> {
    required_miles_with(cs, k, claim, Tolerance::default())
}

pub fn required_miles_with(
    cs: &PriorConstraints,
    k: u64,
    claim: &ReliabilityClaim,
    tol: Tolerance,
) -> Result<f64> {
    cs.validate()?;
    claim.validate()?;
    if claim.p <= cs.epsilon {
        return Err(Error::ClaimBelowGoal {
            p: claim.p,
            epsilon: cs.epsilon,
        });
    }
    let kf = k as f64;
    let supported = |n: f64| {
        let obs = Observation { k, n };
        worst_case_posterior_confidence(cs, &obs, claim.p)
            .map(|conf| conf >= claim.c)
            .unwrap_or(false)
    };
    if supported(kf) {
        return Ok(kf);
    }
    let (lo, hi) = bracket_upward(&supported, kf, 2.0, MILES_LIMIT).ok_or_else(|| {
        Error::Unsatisfiable(format!(
            "confidence {} in p = {:e} not reached with {k} failures below {MILES_LIMIT:e} miles",
            claim.c, claim.p
        ))
    })?;
    Ok(bisect(supported, lo, hi, tol))
}

/// Closed-form mileage assuming the case `k/n <= p` with lower point `x1`:
///
/// `n = k + (k ln(x1/p) + ln(theta (1-c) / (c (1-theta)))) / ln((1-p)/(1-x1))`.
pub fn closed_form_miles(c: f64, p: f64, theta: f64, x1: f64, k: u64) -> f64 {
    let kf = k as f64;
    let prior_term = (theta * (1.0 - c) / (c * (1.0 - theta))).ln();
    let evidence_term = if k > 0 { kf * (x1 / p).ln() } else { 0.0 };
    kf + (evidence_term + prior_term) / ((-p).ln_1p() - (-x1).ln_1p())
}

/// [`required_miles`] through the per-case closed form, accepting only a
/// candidate whose own evidence selects the case it assumed.
pub fn required_miles_closed_form(
    cs: &PriorConstraints,
    k: u64,
    claim: &ReliabilityClaim,
) -> Result<f64> {
    cs.validate()?;
    claim.validate()?;
    if claim.p <= cs.epsilon {
        return Err(Error::ClaimBelowGoal {
            p: claim.p,
            epsilon: cs.epsilon,
        });
    }
    if cs.theta == 1.0 {
        return Ok(k as f64);
    }
    for x1 in [cs.epsilon, cs.p_l] {
        let n = closed_form_miles(claim.c, claim.p, cs.theta, x1, k).max(k as f64);
        if !n.is_finite() {
            continue;
        }
        let obs = Observation { k, n };
        if n == 0.0 {
            return Ok(0.0);
        }
        if obs.frequency() > claim.p {
            continue;
        }
        let chosen = lower_mass_point(cs, &obs);
        let tie = (obs.ln_kernel(cs.p_l) - obs.ln_kernel(cs.epsilon)).abs()
            <= 1e-9 * obs.ln_kernel(cs.epsilon).abs().max(1.0);
        if chosen == x1 || tie {
            return Ok(n);
        }
    }
    Err(Error::ClosedFormInapplicable(format!(
        "no case-consistent solution for k = {k}, p = {:e}, c = {}",
        claim.p, claim.c
    )))
}

/// Smallest bound `p` in `(epsilon, 1)` supported at confidence `c` by `obs`.
pub fn supported_claim(cs: &PriorConstraints, obs: &Observation, c: f64) -> Result<f64> {
    supported_claim_with(cs, obs, c, Tolerance::default())
}

/// As [`supported_claim`]; `tol.rtol` bounds the relative error in `p`.
pub fn supported_claim_with(
    cs: &PriorConstraints,
    obs: &Observation,
    c: f64,
    tol: Tolerance,
) -> Result<f64> {
    cs.validate()?;
    obs.validate()?;
    validate_confidence(c)?;
    let holds = |ln_p: f64| {
        worst_case_posterior_confidence(cs, obs, ln_p.exp())
            .map(|conf| conf >= c)
            .unwrap_or(false)
    };
    let hi = CLAIM_SEARCH_CEILING.ln();
    if cs.epsilon >= CLAIM_SEARCH_CEILING || !holds(hi) {
        return Err(Error::NoClaimSupportable {
            k: obs.k,
            n: obs.n,
            c,
        });
    }
    // Work in ln p: an absolute tolerance there is a relative one in p.
    let ln_p = bisect(
        holds,
        cs.epsilon.ln(),
        hi,
        Tolerance {
            rtol: 0.0,
            atol: tol.rtol,
        },
    );
    Ok(ln_p.exp())
}

/// Extra failure-free miles needed after one failure that follows `n1`
/// failure-free miles, to restore the claim those `n1` miles supported.
pub fn compensation_miles(cs: &PriorConstraints, n1: f64, c: f64) -> Result<CompensationResult> {
    cs.validate()?;
    validate_confidence(c)?;
    if c <= cs.theta {
        // Every p > epsilon is then supported with no evidence at all, so the
        // claim supported by n1 is not attained and n2 = n* - n1 is meaningless.
        return Err(Error::CompensationUndefined(format!(
            "confidence {c} does not exceed prior confidence {}",
            cs.theta
        )));
    }
    let obs = Observation::failure_free(n1)?;
    // n2 is a small difference of two large mileages; solve both to full precision.
    let p = supported_claim_with(cs, &obs, c, Tolerance::MACHINE)?;
    let claim = ReliabilityClaim::new(p, c)?;
    let n_tilde = required_miles_with(cs, 1, &claim, Tolerance::MACHINE)?;
    let n2 = n_tilde - n1;
    if !(n2 > 0.0) {
        return Err(Error::CompensationUndefined(format!(
            "non-positive extra mileage {n2:e} at n1 = {n1:e}"
        )));
    }
    Ok(CompensationResult {
        n1,
        p_supported: p,
        n_tilde,
        n2,
    })
}

/// Mileage `n*` at which one failure makes `p_l` and `epsilon` equally likely:
/// `epsilon (1-epsilon)^(n*-1) = p_l (1-p_l)^(n*-1)`.
pub fn n_star(cs: &PriorConstraints) -> Result<f64> {
    cs.validate()?;
    let gap = (cs.epsilon / cs.p_l).ln();
    let slope = (-cs.epsilon).ln_1p() - (-cs.p_l).ln_1p();
    // Log-ratio of the two one-failure kernels; decreasing in n.
    let crossed = |n: f64| gap + (n - 1.0) * slope <= 0.0;
    let (lo, hi) = bracket_upward(crossed, 1.0, 2.0, MILES_LIMIT).ok_or_else(|| {
        Error::Diverged(format!(
            "n* exceeds {MILES_LIMIT:e} for epsilon = {:e}, p_l = {:e}",
            cs.epsilon, cs.p_l
        ))
    })?;
    Ok(bisect(crossed, lo, hi, Tolerance::MACHINE))
}

/// Roots of `n* = n(c, p, theta, x1, 1)` in `p`, for `x1 = p_l` and `x1 = epsilon`.
pub fn p_star_roots(cs: &PriorConstraints, c: f64) -> Result<(f64, f64)> {
    cs.validate()?;
    validate_confidence(c)?;
    if c <= cs.theta {
        return Err(Error::InvalidClaim(format!(
            "p* is defined for c > theta (c = {c}, theta = {})",
            cs.theta
        )));
    }
    let target = n_star(cs)?;
    let root_for = |x1: f64| {
        let below = |ln_p: f64| closed_form_miles(c, ln_p.exp(), cs.theta, x1, 1) <= target;
        bisect(below, cs.epsilon.ln(), CLAIM_SEARCH_CEILING.ln(), Tolerance::MACHINE).exp()
    };
    Ok((root_for(cs.p_l), root_for(cs.epsilon)))
}

/// The claim `p*` supported just as the lower mass point switches from `p_l`
/// to `epsilon` for one failure.
pub fn p_star(cs: &PriorConstraints, c: f64) -> Result<f64> {
    let (from_floor, from_goal) = p_star_roots(cs, c)?;
    let rel = (from_floor - from_goal).abs() / from_floor.max(from_goal);
    if rel > 1e-6 {
        return Err(Error::NumericFailure(format!(
            "p* roots disagree: {from_floor:e} (x1 = p_l) vs {from_goal:e} (x1 = epsilon)"
        )));
    }
    Ok(0.5 * (from_floor + from_goal))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn paper_constraints(theta: f64) -> PriorConstraints {
        PriorConstraints::new(1.09e-10, theta, 1e-15).unwrap()
    }

    #[test]
    fn failure_free_case_puts_lower_mass_at_goal() {
        let cs = paper_constraints(0.9);
        let obs = Observation::new(0, 1e8).unwrap();
        let prior = worst_case_prior(&cs, &obs, 1.09e-8).unwrap();
        assert_eq!(prior.x1, cs.epsilon);
        assert_eq!(prior.x3, 1.09e-8);
    }

    #[test]
    fn frequency_between_goal_and_claim_puts_lower_mass_at_floor() {
        let cs = paper_constraints(0.9);
        let obs = Observation::new(1, 3.88e9).unwrap();
        let prior = worst_case_prior(&cs, &obs, 4.12e-9).unwrap();
        assert_eq!(prior.x1, cs.p_l);
        assert_eq!(prior.x3, 4.12e-9);
    }

    #[test]
    fn frequency_above_claim_moves_upper_mass_to_mode() {
        let cs = PriorConstraints::new(0.1, 0.9, 0.01).unwrap();
        let obs = Observation::new(6, 10.0).unwrap();
        let prior = worst_case_prior(&cs, &obs, 0.5).unwrap();
        assert_eq!(prior.x1, 0.01);
        assert_relative_eq!(prior.x3, 0.6);
    }

    #[test]
    fn all_five_frequency_regions_are_reproduced() {
        let cs = PriorConstraints::new(0.1, 0.5, 0.01).unwrap();
        let p = 0.3;
        // (k, n, expected x1, expected x3)
        let cases = [
            (0, 50.0, 0.1, 0.3),   // k/n <= p_l
            (1, 60.0, 0.1, 0.3),   // p_l < k/n <= eps, floor kernel larger
            (1, 12.0, 0.01, 0.3),  // p_l < k/n <= eps, floor kernel smaller
            (4, 20.0, 0.01, 0.3),  // eps < k/n <= p
            (9, 20.0, 0.01, 0.45), // p < k/n
        ];
        for (k, n, x1, x3) in cases {
            let obs = Observation::new(k, n).unwrap();
            let freq = obs.frequency();
            let prior = worst_case_prior(&cs, &obs, p).unwrap();
            assert_eq!(prior.x1, x1, "x1 for k={k}, n={n} (k/n={freq})");
            assert_relative_eq!(prior.x3, x3);
        }
        let obs = Observation::new(1, 60.0).unwrap();
        assert!(obs.ln_kernel(0.01) >= obs.ln_kernel(0.1));
        assert!(obs.frequency() > 0.01 && obs.frequency() <= 0.1);
    }

    #[test]
    fn no_evidence_returns_prior_confidence() {
        let cs = paper_constraints(0.37);
        let conf = worst_case_posterior_confidence(&cs, &Observation::new(0, 0.0).unwrap(), 1e-3)
            .unwrap();
        assert_relative_eq!(conf, 0.37, max_relative = 1e-14);
    }

    #[test]
    fn sixty_nine_million_miles_give_95_percent() {
        let cs = paper_constraints(0.9);
        let conf =
            worst_case_posterior_confidence(&cs, &Observation::new(0, 6.92e7).unwrap(), 1.09e-8)
                .unwrap();
        assert!((conf - 0.95).abs() < 0.005, "{conf}");
    }

    #[test]
    fn claims_at_or_below_goal_get_zero() {
        let cs = paper_constraints(0.9);
        let obs = Observation::new(0, 1e12).unwrap();
        assert_eq!(worst_case_posterior_confidence(&cs, &obs, cs.epsilon).unwrap(), 0.0);
        assert_eq!(worst_case_posterior_confidence(&cs, &obs, 1e-12).unwrap(), 0.0);
        assert!(matches!(
            worst_case_prior(&cs, &obs, cs.epsilon),
            Err(Error::ClaimBelowGoal { .. })
        ));
    }

    #[test]
    fn tie_between_floor_and_goal_prefers_goal_and_is_harmless() {
        let cs = paper_constraints(0.9);
        let n = n_star(&cs).unwrap();
        let obs = Observation { k: 1, n };
        let floor = Observation { k: 1, n }.ln_kernel(cs.p_l);
        let goal = obs.ln_kernel(cs.epsilon);
        assert!((floor - goal).abs() < 1e-9);
        let p = 3e-10;
        let by_goal = two_point_confidence(
            &TwoPointPrior { x1: cs.epsilon, x3: p, theta: 0.9 },
            &obs,
        );
        let by_floor = two_point_confidence(
            &TwoPointPrior { x1: cs.p_l, x3: p, theta: 0.9 },
            &obs,
        );
        assert_relative_eq!(by_goal, by_floor, max_relative = 1e-8);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        assert!(PriorConstraints::new(1e-10, 0.9, 1e-9).is_err());
        assert!(PriorConstraints::new(1e-10, 0.0, 1e-15).is_err());
        assert!(Observation::new(1, 0.0).is_err());
        assert!(Observation::new(0, -1.0).is_err());
        assert!(ReliabilityClaim::new(0.1, 1.0).is_err());
        let bad = PriorConstraints { epsilon: 0.1, theta: 1.5, p_l: 0.01 };
        assert!(matches!(
            worst_case_posterior_confidence(&bad, &Observation::new(0, 1.0).unwrap(), 0.5),
            Err(Error::InvalidConstraints(_))
        ));
    }

    #[test]
    fn required_miles_reproduces_q1() {
        let claim = ReliabilityClaim::new(1.09e-8, 0.95).unwrap();
        let strong = required_miles(&paper_constraints(0.9), 0, &claim).unwrap();
        let weak = required_miles(&paper_constraints(0.1), 0, &claim).unwrap();
        assert!((strong / 6.92e7 - 1.0).abs() < 0.005, "{strong:e}");
        assert!((weak / 4.77e8 - 1.0).abs() < 0.005, "{weak:e}");
    }

    #[test]
    fn required_miles_reproduces_table_entries() {
        let cs = paper_constraints(0.9);
        let n43 = required_miles(&cs, 43, &ReliabilityClaim::new(8.72e-9, 0.95).unwrap()).unwrap();
        let n1 = required_miles(&cs, 1, &ReliabilityClaim::new(4.12e-9, 0.95).unwrap()).unwrap();
        assert!((n43 / 7.89e10 - 1.0).abs() < 0.01, "{n43:e}");
        assert!((n1 / 3.88e9 - 1.0).abs() < 0.01, "{n1:e}");
    }

    #[test]
    fn required_miles_matches_closed_form() {
        let cs = paper_constraints(0.9);
        for (k, p) in [(0, 1.09e-8), (1, 4.12e-9), (43, 8.72e-9), (1, 1.2e-10), (3, 1e-9)] {
            let claim = ReliabilityClaim::new(p, 0.95).unwrap();
            let numeric = required_miles(&cs, k, &claim).unwrap();
            let closed = required_miles_closed_form(&cs, k, &claim).unwrap();
            assert_relative_eq!(numeric, closed, max_relative = 1e-8);
        }
    }

    #[test]
    fn less_stringent_goal_needs_under_a_thousand_miles() {
        let cs = PriorConstraints::new(1e-4, 0.9, 1e-15).unwrap();
        let n = required_miles(&cs, 0, &ReliabilityClaim::new(1e-3, 0.95).unwrap()).unwrap();
        // ln(c(1-theta)/(theta(1-c))) / ln((1-eps)/(1-p)), evaluated by hand: 830.17
        assert!((n - 830.17).abs() < 1.0, "{n}");
        assert!(n < 1e3);
    }

    #[test]
    fn confidence_below_prior_needs_no_miles() {
        let cs = paper_constraints(0.9);
        let claim = ReliabilityClaim::new(1.09e-8, 0.8).unwrap();
        assert_eq!(required_miles(&cs, 0, &claim).unwrap(), 0.0);
        assert_eq!(required_miles_closed_form(&cs, 0, &claim).unwrap(), 0.0);
    }

    #[test]
    fn supported_claim_inverts_required_miles() {
        let cs = paper_constraints(0.9);
        let claim = ReliabilityClaim::new(2e-9, 0.95).unwrap();
        let n = required_miles(&cs, 0, &claim).unwrap();
        let p = supported_claim(&cs, &Observation::failure_free(n).unwrap(), 0.95).unwrap();
        assert_relative_eq!(p, 2e-9, max_relative = 1e-7);
    }

    #[test]
    fn supported_claim_at_n_star() {
        let cs = paper_constraints(0.9);
        let p = supported_claim(&cs, &Observation::failure_free(1.06e11).unwrap(), 0.95).unwrap();
        assert!((p / 1.16e-10 - 1.0).abs() < 0.01, "{p:e}");
    }

    #[test]
    fn supported_claim_fails_without_evidence() {
        let cs = paper_constraints(0.9);
        for n in [0.0, 0.01] {
            let obs = Observation::failure_free(n).unwrap();
            let at_ceiling = worst_case_posterior_confidence(&cs, &obs, CLAIM_SEARCH_CEILING).unwrap();
            assert!(at_ceiling < 0.95);
            assert!(matches!(
                supported_claim(&cs, &obs, 0.95),
                Err(Error::NoClaimSupportable { .. })
            ));
        }
    }

    #[test]
    fn ten_miles_support_a_weak_claim() {
        // (1-p)^10 / (1-eps)^10 = theta(1-c)/(c(1-theta)) solved by hand.
        let cs = paper_constraints(0.9);
        let p = supported_claim(&cs, &Observation::failure_free(10.0).unwrap(), 0.95).unwrap();
        let k = 0.9_f64 * 0.05 / (0.95 * 0.1);
        let want = 1.0 - (1.0 - cs.epsilon) * k.powf(0.1);
        assert_relative_eq!(p, want, max_relative = 1e-8);
    }

    #[test]
    fn n_star_matches_paper_and_linear_solution() {
        let cs = paper_constraints(0.9);
        let n = n_star(&cs).unwrap();
        let linear = 1.0
            + (cs.epsilon / cs.p_l).ln() / ((-cs.p_l).ln_1p() - (-cs.epsilon).ln_1p());
        assert_relative_eq!(n, linear, max_relative = 1e-12);
        assert!((n / 1.06e11 - 1.0).abs() < 0.01, "{n:e}");
    }

    #[test]
    fn n_star_divergence_is_reported() {
        let cs = PriorConstraints::new(2e-20, 0.9, 1e-20).unwrap();
        assert!(matches!(n_star(&cs), Err(Error::Diverged(_))));
    }

    #[test]
    fn n_star_tends_to_inverse_floor_as_goal_approaches_floor() {
        let p_l = 1e-6;
        let cs = PriorConstraints::new(p_l * (1.0 + 1e-6), 0.9, p_l).unwrap();
        let n = n_star(&cs).unwrap();
        assert_relative_eq!(n, 1.0 / p_l, max_relative = 1e-5);
    }

    #[test]
    fn p_star_matches_paper() {
        let cs = paper_constraints(0.9);
        let (a, b) = p_star_roots(&cs, 0.95).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-6);
        let p = p_star(&cs, 0.95).unwrap();
        assert!(p > cs.epsilon);
        assert!((p / 1.16e-10 - 1.0).abs() < 0.02, "{p:e}");
    }

    #[test]
    fn p_star_requires_confidence_above_prior() {
        assert!(p_star(&paper_constraints(0.9), 0.9).is_err());
    }

    #[test]
    fn compensation_composes_the_two_solvers() {
        let cs = paper_constraints(0.9);
        let r = compensation_miles(&cs, 1e7, 0.95).unwrap();
        let claim = ReliabilityClaim::new(r.p_supported, 0.95).unwrap();
        let n1 = required_miles_closed_form(&cs, 0, &claim).unwrap();
        let n_tilde = required_miles_closed_form(&cs, 1, &claim).unwrap();
        assert_relative_eq!(n1, 1e7, max_relative = 1e-7);
        assert_relative_eq!(r.n_tilde, n_tilde, max_relative = 1e-7);
        assert_relative_eq!(r.n2, r.n_tilde - r.n1);
        assert!(r.n2 > 0.0);
    }

    #[test]
    fn compensation_tends_to_inverse_goal() {
        let cs = paper_constraints(0.9);
        let r = compensation_miles(&cs, 1e14, 0.95).unwrap();
        assert!((r.n2 * cs.epsilon - 1.0).abs() < 0.01, "{:e}", r.n2);
    }

    #[test]
    fn compensation_undefined_when_confidence_not_above_prior() {
        let cs = paper_constraints(0.9);
        assert!(matches!(
            compensation_miles(&cs, 1e9, 0.9),
            Err(Error::CompensationUndefined(_))
        ));
    }
}
