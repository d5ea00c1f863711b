//! Brute-force check of the worst-case prior.
//!
//! [`posterior_confidence`] evaluates `Pr(X <= p | k, n)` for any complete
//! prior (exact sums for discrete priors, quadrature for continuous ones) and
//! [`minimize_over_feasible_priors`] searches the feasible set directly: every
//! two-point prior on a log-spaced grid plus randomly drawn feasible mixtures.
//! Nothing here calls into the closed-form worst-case construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cbi::{Observation, PriorConstraints};
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::quadrature::integrate_log;
use crate::special::{ln_beta, ln_bernoulli_kernel, log_sum_exp, logistic_of_neg};

const MASS_TOL: f64 = 1e-12;
const QUAD_TOL: f64 = 1e-11;

/// Finite prior: `masses[i]` at `support[i]`, support sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePrior {
    support: Vec<f64>,
    masses: Vec<f64>,
}

impl DiscretePrior {
    pub fn new(support: Vec<f64>, masses: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != masses.len() {
            return Err(Error::InvalidPrior(format!(
                "support ({}) and masses ({}) must be non-empty and of equal length",
                support.len(),
                masses.len()
            )));
        }
        if support.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::InvalidPrior("support points must lie in [0, 1]".into()));
        }
        if masses.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            return Err(Error::InvalidPrior("masses must be finite and non-negative".into()));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidPrior(format!("masses sum to {total}, not 1")));
        }
        let mut pairs: Vec<(f64, f64)> = support.into_iter().zip(masses).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (support, masses) = pairs.into_iter().unzip();
        Ok(Self { support, masses })
    }

    /// Discrete version of a worst-case prior for the claim `X <= p`.
    ///
    /// An upper point equal to `p` stands for the limit from above, so it is
    /// placed just above `p`.
    pub fn from_two_point(prior: &crate::cbi::TwoPointPrior, p: f64) -> Result<Self> {
        let x3 = if prior.x3 <= p { just_above(p) } else { prior.x3 };
        Self::new(vec![prior.x1, x3], vec![prior.theta, 1.0 - prior.theta])
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    /// Whether the prior satisfies `Pr(X <= epsilon) = theta`, `Pr(X >= p_l) = 1`.
    pub fn check_feasible(&self, cs: &PriorConstraints) -> Result<()> {
        let below_floor: f64 = self
            .iter()
            .filter(|(x, _)| *x < cs.p_l)
            .map(|(_, m)| m)
            .sum();
        if below_floor > MASS_TOL {
            return Err(Error::InvalidPrior(format!(
                "mass {below_floor} lies below p_l = {:e}",
                cs.p_l
            )));
        }
        let at_goal: f64 = self
            .iter()
            .filter(|(x, _)| *x <= cs.epsilon)
            .map(|(_, m)| m)
            .sum();
        if (at_goal - cs.theta).abs() > MASS_TOL {
            return Err(Error::InvalidPrior(format!(
                "mass at or below epsilon is {at_goal}, constraint requires {}",
                cs.theta
            )));
        }
        Ok(())
    }

    fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.support.iter().copied().zip(self.masses.iter().copied())
    }
}

/// Parametric priors integrated numerically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ContinuousPriorSpec {
    BetaShaped { a: f64, b: f64 },
    UniformOnInterval { lo: f64, hi: f64 },
    PointMixture { prior: DiscretePrior },
}

impl ContinuousPriorSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::BetaShaped { a, b } if *a > 0.0 && *b > 0.0 => Ok(()),
            Self::BetaShaped { a, b } => Err(Error::InvalidPrior(format!(
                "Beta shapes must be positive, got ({a}, {b})"
            ))),
            Self::UniformOnInterval { lo, hi } if 0.0 <= *lo && lo < hi && *hi <= 1.0 => Ok(()),
            Self::UniformOnInterval { lo, hi } => Err(Error::InvalidPrior(format!(
                "uniform interval [{lo}, {hi}] must be a non-empty subset of [0, 1]"
            ))),
            Self::PointMixture { .. } => Ok(()),
        }
    }
}

/// Anything `Pr(X <= p | k, n)` can be evaluated for.
pub trait Prior {
    fn posterior_confidence(&self, obs: &Observation, p: f64) -> Result<f64>;
}

/// `Pr(X <= p | k, n)` under `prior`.
pub fn posterior_confidence<P: Prior + ?Sized>(prior: &P, obs: &Observation, p: f64) -> Result<f64> {
    obs.validate()?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidClaim(format!("bound p must lie in [0, 1], got {p}")));
    }
    prior.posterior_confidence(obs, p)
}

/// Combines log posterior masses below and above `p`.
fn split_confidence(ln_below: f64, ln_above: f64) -> Result<f64> {
    match (ln_below == f64::NEG_INFINITY, ln_above == f64::NEG_INFINITY) {
        (true, true) => Err(Error::NormalizationFailure),
        (true, false) => Ok(0.0),
        (false, true) => Ok(1.0),
        (false, false) => Ok(logistic_of_neg(ln_above - ln_below)),
    }
}

impl Prior for DiscretePrior {
    fn posterior_confidence(&self, obs: &Observation, p: f64) -> Result<f64> {
        let (k, n) = (obs.k as f64, obs.n);
        let mut below = Vec::new();
        let mut above = Vec::new();
        for (x, m) in self.iter().filter(|(_, m)| *m > 0.0) {
            let term = m.ln() + ln_bernoulli_kernel(x, k, n);
            if x <= p {
                below.push(term);
            } else {
                above.push(term);
            }
        }
        split_confidence(log_sum_exp(&below), log_sum_exp(&above))
    }
}

type LnDensity = Box<dyn Fn(f64, f64, f64, f64) -> f64>;

impl Prior for ContinuousPriorSpec {
    fn posterior_confidence(&self, obs: &Observation, p: f64) -> Result<f64> {
        self.validate()?;
        let (lo, hi, ln_density): (f64, f64, LnDensity) = match *self {
            Self::PointMixture { ref prior } => return prior.posterior_confidence(obs, p),
            Self::BetaShaped { a, b } => {
                let norm = ln_beta(a, b);
                (
                    0.0,
                    1.0,
                    Box::new(move |_, _, lx, ly| (a - 1.0) * lx + (b - 1.0) * ly - norm),
                )
            }
            Self::UniformOnInterval { lo, hi } => {
                let ln_w = -(hi - lo).ln();
                (lo, hi, Box::new(move |_, _, _, _| ln_w))
            }
        };
        let (k, n) = (obs.k as f64, obs.n);
        let integrand = |x: f64, y: f64| {
            if x <= 0.0 || y <= 0.0 {
                return f64::NEG_INFINITY;
            }
            let (lx, ly) = if x < 0.5 {
                (x.ln(), (-x).ln_1p())
            } else {
                ((-y).ln_1p(), y.ln())
            };
            let hit = if k > 0.0 { k * lx } else { 0.0 };
            let miss = if n - k > 0.0 { (n - k) * ly } else { 0.0 };
            ln_density(x, y, lx, ly) + hit + miss
        };
        // Breakpoints around the posterior mode so the peak is resolved.
        let (a, b) = match *self {
            Self::BetaShaped { a, b } => (a, b),
            _ => (1.0, 1.0),
        };
        let total = n + a + b;
        let mode = ((k + a - 1.0) / (total - 2.0).max(1.0)).clamp(0.0, 1.0);
        let spread = (mode.max(1.0 / total) * (1.0 - mode).max(1.0 / total) / total).sqrt();
        let mut breaks = vec![p, mode];
        for j in 0..10 {
            let w = spread * f64::from(1u32 << j);
            breaks.push(mode - w);
            breaks.push(mode + w);
        }
        let ln_below = if p > lo {
            integrate_log(integrand, lo, p.min(hi), &breaks, QUAD_TOL)?
        } else {
            f64::NEG_INFINITY
        };
        let ln_above = if p < hi {
            integrate_log(integrand, p.max(lo), hi, &breaks, QUAD_TOL)?
        } else {
            f64::NEG_INFINITY
        };
        split_confidence(ln_below, ln_above)
    }
}

/// Settings for the random part of the oracle search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Number of random feasible mixtures tried in addition to the grid.
    pub random_mixtures: usize,
    pub seed: u64,
    pub parallelism: Parallelism,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            random_mixtures: 1000,
            seed: 42,
            parallelism: Parallelism::default(),
        }
    }
}

fn just_above(p: f64) -> f64 {
    (p * (1.0 + 1e-12)).min(1.0)
}

/// Grid used by [`minimize_over_feasible_priors`]: `grid_size` log-spaced
/// points over `[p_l, 1]` plus `p_l`, `epsilon`, `p`, a point just above `p`,
/// and `k/n` when it lies in range.
pub fn candidate_grid(cs: &PriorConstraints, obs: &Observation, p: f64, grid_size: usize) -> Vec<f64> {
    let ln_lo = cs.p_l.ln();
    let steps = grid_size.max(2) - 1;
    let mut grid: Vec<f64> = (0..=steps)
        .map(|i| (ln_lo - ln_lo * i as f64 / steps as f64).exp().min(1.0))
        .collect();
    grid.extend([cs.p_l, cs.epsilon, 1.0]);
    if p >= cs.p_l {
        grid.push(p.min(1.0));
        grid.push(just_above(p));
    }
    let freq = obs.frequency();
    if freq >= cs.p_l && freq <= 1.0 {
        grid.push(freq);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Minimum of `Pr(X <= p | k, n)` over discretised feasible priors, with the
/// prior attaining it.
pub fn minimize_over_feasible_priors(
    cs: &PriorConstraints,
    obs: &Observation,
    p: f64,
    grid_size: usize,
) -> Result<(f64, DiscretePrior)> {
    minimize_over_feasible_priors_with(cs, obs, p, grid_size, &OracleConfig::default())
}

pub fn minimize_over_feasible_priors_with(
    cs: &PriorConstraints,
    obs: &Observation,
    p: f64,
    grid_size: usize,
    config: &OracleConfig,
) -> Result<(f64, DiscretePrior)> {
    cs.validate()?;
    obs.validate()?;
    if grid_size < 3 {
        return Err(Error::InvalidArgument(format!("grid_size must be >= 3, got {grid_size}")));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidClaim(format!("bound p must lie in (0, 1], got {p}")));
    }
    let grid = candidate_grid(cs, obs, p, grid_size);
    let (k, n) = (obs.k as f64, obs.n);
    let ln_kernel: Vec<f64> = grid.iter().map(|&x| ln_bernoulli_kernel(x, k, n)).collect();
    let lower: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] <= cs.epsilon).collect();
    let upper: Vec<usize> = (0..grid.len()).filter(|&i| grid[i] > cs.epsilon).collect();
    let (ln_theta, ln_rest) = (cs.theta.ln(), (1.0 - cs.theta).ln());
    let has_upper_mass = cs.theta < 1.0;

    let pair_conf = |i: usize, j: Option<usize>| {
        let mut below = f64::NEG_INFINITY;
        let mut above = f64::NEG_INFINITY;
        let mut add = |x: f64, term: f64| {
            if x <= p {
                below = crate::special::log_add_exp(below, term);
            } else {
                above = crate::special::log_add_exp(above, term);
            }
        };
        add(grid[i], ln_theta + ln_kernel[i]);
        if let Some(j) = j {
            add(grid[j], ln_rest + ln_kernel[j]);
        }
        split_confidence(below, above).unwrap_or(f64::NAN)
    };

    // Exhaustive two-point search, one row per lower point.
    let rows = config.parallelism.map_slice(&lower, |&i| {
        if !has_upper_mass {
            return (pair_conf(i, None), i, None);
        }
        upper
            .iter()
            .map(|&j| (pair_conf(i, Some(j)), i, Some(j)))
            .filter(|(c, _, _)| !c.is_nan())
            .fold((f64::INFINITY, i, None), |best, cand| if cand.0 < best.0 { cand } else { best })
    });
    let (mut best, bi, bj) = rows
        .into_iter()
        .fold((f64::INFINITY, usize::MAX, None), |best, cand| if cand.0 < best.0 { cand } else { best });
    if bi == usize::MAX {
        return Err(Error::NormalizationFailure);
    }
    let mut best_prior = match bj {
        Some(j) => DiscretePrior::new(vec![grid[bi], grid[j]], vec![cs.theta, 1.0 - cs.theta])?,
        None => DiscretePrior::new(vec![grid[bi]], vec![1.0])?,
    };

    // Random feasible mixtures as a counterexample search.
    let samples = config.parallelism.map_range(config.random_mixtures, |idx| {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(idx as u64);
        let prior = random_feasible_mixture(cs, &mut rng);
        let conf = prior.posterior_confidence(obs, p).unwrap_or(f64::INFINITY);
        (conf, prior)
    });
    for (conf, prior) in samples {
        if conf < best {
            best = conf;
            best_prior = prior;
        }
    }
    Ok((best, best_prior))
}

/// A random prior meeting the constraints: up to four points in `[p_l, epsilon]`
/// sharing mass `theta` and up to four in `(epsilon, 1]` sharing `1 - theta`.
pub fn random_feasible_mixture<R: Rng>(cs: &PriorConstraints, rng: &mut R) -> DiscretePrior {
    let mut support = Vec::new();
    let mut masses = Vec::new();
    let mut draw_block = |lo: f64, hi: f64, total: f64, rng: &mut R| {
        if total <= 0.0 {
            return;
        }
        let count = rng.random_range(1..=4);
        let weights: Vec<f64> = (0..count).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let sum: f64 = weights.iter().sum();
        let (ln_lo, ln_hi) = (lo.ln(), hi.ln());
        for w in weights {
            let x = (ln_lo + (ln_hi - ln_lo) * rng.random::<f64>()).exp().clamp(lo, hi);
            support.push(x);
            masses.push(total * w / sum);
        }
    };
    draw_block(cs.p_l, cs.epsilon, cs.theta, rng);
    let upper_lo = just_above(cs.epsilon);
    draw_block(upper_lo, 1.0, 1.0 - cs.theta, rng);
    // Renormalise away rounding in the weight sums.
    let total: f64 = masses.iter().sum();
    let masses = masses.into_iter().map(|m| m / total).collect();
    DiscretePrior::new(support, masses).expect("mixture is normalised by construction")
}
