//! Software reliability growth models fitted by maximum likelihood to
//! inter-failure miles: Goel–Okumoto (GO), Duane (DU), Musa–Okumoto (MO),
//! Littlewood (LI) and Littlewood–Verrall (LV).
//!
//! NHPP families use the likelihood `sum ln m'(t_i) - m(t_end)`. Where a
//! parameter has a closed-form maximiser given the others it is profiled out,
//! and the remainder is searched in log space by Nelder–Mead from several
//! starting points.
//!
//! These models describe observed reliability growth. They are not a
//! mechanism for demonstrating that a safety requirement is met.

mod analysis;
pub(crate) mod optimize;
mod predictive;
mod rolling;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::cumulative;
use crate::error::{Error, Result};
use optimize::NelderMead;

pub use analysis::{analyze_history, AnalysisOptions, KindAnalysis, SrgmAnalysis};
pub use predictive::PredictiveDistribution;
pub use rolling::{
    final_forecast, prequential_records, rolling_predictions, rolling_predictions_with, RollingOptions,
    RollingRun, RollingStep, SkippedStep,
};

/// Shortest prefix a model is fitted to by default.
pub const MIN_FIT_GAPS: usize = 10;
/// First prefix length used by rolling predictions by default.
pub const DEFAULT_ROLLING_START: usize = 50;
const RESTARTS: usize = 5;

pub const SAFETY_CAVEAT: &str = "note: reliability growth models extrapolate observed trends; \
they are not a mechanism for deciding whether a safety-critical system meets its requirements.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SrgmKind {
    #[serde(rename = "GO")]
    Go,
    #[serde(rename = "DU")]
    Du,
    #[serde(rename = "MO")]
    Mo,
    #[serde(rename = "LI")]
    Li,
    #[serde(rename = "LV")]
    Lv,
}

impl SrgmKind {
    pub const ALL: [SrgmKind; 5] = [SrgmKind::Go, SrgmKind::Du, SrgmKind::Mo, SrgmKind::Li, SrgmKind::Lv];

    pub fn name(self) -> &'static str {
        match self {
            SrgmKind::Go => "GO",
            SrgmKind::Du => "DU",
            SrgmKind::Mo => "MO",
            SrgmKind::Li => "LI",
            SrgmKind::Lv => "LV",
        }
    }

    pub fn is_nhpp(self) -> bool {
        matches!(self, SrgmKind::Go | SrgmKind::Du | SrgmKind::Mo)
    }
}

impl fmt::Display for SrgmKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SrgmKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SrgmKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model `{s}` (expected GO, DU, MO, LI or LV)")))
    }
}

/// Fitted parameters of each family.
///
/// * GO: `m(t) = a (1 - exp(-b t))`
/// * DU: `m(t) = alpha t^beta`
/// * MO: `m(t) = ln(1 + lambda0 theta0 t) / theta0`
/// * LI: rate `(N - i + 1) alpha / (beta + t)` after `i - 1` failures at elapsed `t`
/// * LV: gap `i` is Pareto with scale `beta1 + beta2 i` and shape `alpha`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SrgmParams {
    #[serde(rename = "GO")]
    Go { a: f64, b: f64 },
    #[serde(rename = "DU")]
    Du { alpha: f64, beta: f64 },
    #[serde(rename = "MO")]
    Mo { lambda0: f64, theta0: f64 },
    #[serde(rename = "LI")]
    Li { n_faults: f64, alpha: f64, beta: f64 },
    #[serde(rename = "LV")]
    Lv { alpha: f64, beta1: f64, beta2: f64 },
}

impl SrgmParams {
    pub fn kind(&self) -> SrgmKind {
        match self {
            SrgmParams::Go { .. } => SrgmKind::Go,
            SrgmParams::Du { .. } => SrgmKind::Du,
            SrgmParams::Mo { .. } => SrgmKind::Mo,
            SrgmParams::Li { .. } => SrgmKind::Li,
            SrgmParams::Lv { .. } => SrgmKind::Lv,
        }
    }

    pub fn named(&self) -> Vec<(&'static str, f64)> {
        match *self {
            SrgmParams::Go { a, b } => vec![("a", a), ("b", b)],
            SrgmParams::Du { alpha, beta } => vec![("alpha", alpha), ("beta", beta)],
            SrgmParams::Mo { lambda0, theta0 } => vec![("lambda0", lambda0), ("theta0", theta0)],
            SrgmParams::Li { n_faults, alpha, beta } => vec![("N", n_faults), ("alpha", alpha), ("beta", beta)],
            SrgmParams::Lv { alpha, beta1, beta2 } => vec![("alpha", alpha), ("beta1", beta1), ("beta2", beta2)],
        }
    }

    /// Checks the family domain for a model that has seen `failures` events.
    pub fn validate(&self, failures: usize) -> Result<()> {
        if let Some((name, v)) = self.named().into_iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidArgument(format!("{} parameter {name} = {v} is not a positive real", self.kind())));
        }
        if let SrgmParams::Li { n_faults, .. } = *self {
            if n_faults <= failures as f64 {
                return Err(Error::InvalidArgument(format!(
                    "LI needs N > {failures} after {failures} failures, got {n_faults}"
                )));
            }
        }
        Ok(())
    }

    /// Mean number of events in `[0, t]` (NHPP families).
    pub(crate) fn mean(&self, t: f64) -> f64 {
        match *self {
            SrgmParams::Go { a, b } => -a * (-b * t).exp_m1(),
            SrgmParams::Du { alpha, beta } => alpha * t.powf(beta),
            SrgmParams::Mo { lambda0, theta0 } => (lambda0 * theta0 * t).ln_1p() / theta0,
            _ => f64::NAN,
        }
    }

    pub(crate) fn ln_intensity(&self, t: f64) -> f64 {
        match *self {
            SrgmParams::Go { a, b } => a.ln() + b.ln() - b * t,
            SrgmParams::Du { alpha, beta } => alpha.ln() + beta.ln() + (beta - 1.0) * t.ln(),
            SrgmParams::Mo { lambda0, theta0 } => lambda0.ln() - (lambda0 * theta0 * t).ln_1p(),
            _ => f64::NAN,
        }
    }

    /// `m(origin + x) - m(origin)` without cancellation.
    pub(crate) fn increment(&self, origin: f64, x: f64) -> f64 {
        match *self {
            SrgmParams::Go { a, b } => -a * (-b * origin).exp() * (-b * x).exp_m1(),
            SrgmParams::Du { alpha, beta } => {
                if origin > 0.0 {
                    alpha * origin.powf(beta) * (beta * (x / origin).ln_1p()).exp_m1()
                } else {
                    alpha * x.powf(beta)
                }
            }
            SrgmParams::Mo { lambda0, theta0 } => {
                let phi = lambda0 * theta0;
                (phi * x / (1.0 + phi * origin)).ln_1p() / theta0
            }
            _ => f64::NAN,
        }
    }

    /// Distribution of the next gap after `failures` events, the last at
    /// cumulative miles `last_event`, given survival for `elapsed` miles since.
    pub fn conditional(&self, failures: usize, last_event: f64, elapsed: f64) -> PredictiveDistribution {
        match *self {
            SrgmParams::Li { n_faults, alpha, beta } => PredictiveDistribution::Pareto {
                scale: beta + last_event + elapsed,
                shape: (n_faults - failures as f64) * alpha,
            },
            SrgmParams::Lv { alpha, beta1, beta2 } => PredictiveDistribution::Pareto {
                scale: beta1 + beta2 * (failures + 1) as f64 + elapsed,
                shape: alpha,
            },
            nhpp => PredictiveDistribution::Nhpp { params: nhpp, origin: last_event + elapsed },
        }
    }
}

/// Log-likelihood of `gaps` followed by `censored_tail` event-free miles.
pub fn log_likelihood(params: &SrgmParams, gaps: &[f64], censored_tail: f64) -> f64 {
    let times = cumulative(gaps);
    let j = gaps.len();
    let last = times.last().copied().unwrap_or(0.0);
    let end = last + censored_tail;
    match *params {
        SrgmParams::Go { .. } | SrgmParams::Du { .. } | SrgmParams::Mo { .. } => {
            times.iter().map(|&t| params.ln_intensity(t)).sum::<f64>() - params.mean(end)
        }
        SrgmParams::Li { n_faults, alpha, beta } => {
            let mut ll = 0.0;
            let mut prev = 0.0;
            for (i, &t) in times.iter().enumerate() {
                let remaining = n_faults - i as f64;
                let step = ((t - prev) / (beta + prev)).ln_1p();
                ll += (remaining * alpha).ln() - (beta + t).ln() - remaining * alpha * step;
                prev = t;
            }
            ll - (n_faults - j as f64) * alpha * (censored_tail / (beta + last)).ln_1p()
        }
        SrgmParams::Lv { alpha, beta1, beta2 } => {
            let mut ll = 0.0;
            for (i, &t) in gaps.iter().enumerate() {
                let psi = beta1 + beta2 * (i + 1) as f64;
                ll += alpha.ln() + alpha * psi.ln() - (alpha + 1.0) * (psi + t).ln();
            }
            let psi_next = beta1 + beta2 * (j + 1) as f64;
            ll - alpha * (censored_tail / psi_next).ln_1p()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Event-free miles after the last gap, entered as a survival term.
    pub censored_tail: f64,
    pub min_history: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { censored_tail: 0.0, min_history: MIN_FIT_GAPS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub kind: SrgmKind,
    pub params: SrgmParams,
    pub history_length: usize,
    pub censored_tail: f64,
    pub log_likelihood: f64,
    /// The optimum sits on the edge of the search box (typically a family
    /// degenerating into its no-growth or infinite-fault limit).
    pub at_boundary: bool,
    /// Kolmogorov distance of the in-sample probability integral transforms
    /// from uniform; reported, not asserted.
    pub rescaling_ks: f64,
}

struct Sample<'a> {
    gaps: &'a [f64],
    times: Vec<f64>,
    j: f64,
    last: f64,
    end: f64,
    tail: f64,
    mean_gap: f64,
}

type Profile<'s> = Box<dyn Fn(&[f64]) -> Option<(f64, SrgmParams)> + 's>;

fn inside(x: &[f64], bounds: &[(f64, f64)]) -> bool {
    x.iter().zip(bounds).all(|(v, (lo, hi))| v >= lo && v <= hi)
}

fn profile<'s>(kind: SrgmKind, s: &'s Sample<'s>) -> (Profile<'s>, Vec<(f64, f64)>, Vec<Vec<f64>>) {
    let j = s.j;
    match kind {
        SrgmKind::Go => {
            let sum_t: f64 = s.times.iter().sum();
            let f = move |x: &[f64]| {
                let b = x[0].exp() / s.end;
                let a = j / -(-b * s.end).exp_m1();
                let ll = j * a.ln() + j * b.ln() - b * sum_t - j;
                Some((ll, SrgmParams::Go { a, b }))
            };
            let starts = [-4.0, -2.0, 0.0, 1.0, 2.5].iter().map(|&v| vec![v]).collect();
            (Box::new(f), vec![(-12.0, 12.0)], starts)
        }
        SrgmKind::Mo => {
            let f = move |x: &[f64]| {
                let phi = x[0].exp() / s.end;
                let theta0 = (phi * s.end).ln_1p() / j;
                let lambda0 = phi / theta0;
                let ll = j * lambda0.ln() - s.times.iter().map(|&t| (phi * t).ln_1p()).sum::<f64>() - j;
                Some((ll, SrgmParams::Mo { lambda0, theta0 }))
            };
            let starts = [-2.0, 0.0, 2.0, 4.0, 6.0].iter().map(|&v| vec![v]).collect();
            (Box::new(f), vec![(-14.0, 20.0)], starts)
        }
        SrgmKind::Li => {
            let f = move |x: &[f64]| {
                let beta = x[0].exp() * s.mean_gap;
                let n_faults = j + x[1].exp() * j;
                let mut d = 0.0;
                let mut ln_sum = 0.0;
                let mut prev = 0.0;
                for (i, &t) in s.times.iter().enumerate() {
                    let remaining = n_faults - i as f64;
                    d += remaining * ((t - prev) / (beta + prev)).ln_1p();
                    ln_sum += remaining.ln() - (beta + t).ln();
                    prev = t;
                }
                d += (n_faults - j) * (s.tail / (beta + s.last)).ln_1p();
                let alpha = j / d;
                let ll = ln_sum + j * alpha.ln() - j;
                Some((ll, SrgmParams::Li { n_faults, alpha, beta }))
            };
            let starts = vec![vec![0.0, 0.0], vec![2.0, -2.0], vec![-2.0, 2.0], vec![4.0, 1.0], vec![1.0, 4.0]];
            (Box::new(f), vec![(-15.0, 15.0), (-15.0, 15.0)], starts)
        }
        SrgmKind::Lv => {
            let f = move |x: &[f64]| {
                let beta1 = x[0].exp() * s.mean_gap;
                let beta2 = x[1].exp() * s.mean_gap / j;
                let mut sum = 0.0;
                let mut ln_sum = 0.0;
                for (i, &t) in s.gaps.iter().enumerate() {
                    let psi = beta1 + beta2 * (i + 1) as f64;
                    sum += (t / psi).ln_1p();
                    ln_sum += (psi + t).ln();
                }
                sum += (s.tail / (beta1 + beta2 * (j + 1.0))).ln_1p();
                let alpha = j / sum;
                let ll = j * alpha.ln() - j - ln_sum;
                Some((ll, SrgmParams::Lv { alpha, beta1, beta2 }))
            };
            let starts = vec![vec![0.0, 0.0], vec![-2.0, 1.0], vec![1.0, -2.0], vec![-1.0, 2.0], vec![2.0, -4.0]];
            (Box::new(f), vec![(-15.0, 15.0), (-20.0, 15.0)], starts)
        }
        SrgmKind::Du => unreachable!("DU has a closed-form maximiser"),
    }
}

/// Fits `kind` to `gaps` with no censored tail and the default minimum length.
pub fn fit(kind: SrgmKind, gaps: &[f64]) -> Result<FittedModel> {
    fit_with(kind, gaps, &FitOptions::default())
}

pub fn fit_with(kind: SrgmKind, gaps: &[f64], options: &FitOptions) -> Result<FittedModel> {
    let needed = options.min_history.max(2);
    if gaps.len() < needed {
        return Err(Error::InsufficientHistory { needed, got: gaps.len() });
    }
    if let Some(g) = gaps.iter().find(|g| !(g.is_finite() && **g > 0.0)) {
        return Err(Error::InvalidArgument(format!("inter-failure miles must be positive, got {g}")));
    }
    let tail = options.censored_tail;
    if !(tail.is_finite() && tail >= 0.0) {
        return Err(Error::InvalidArgument(format!("censored tail must be non-negative, got {tail}")));
    }
    let times = cumulative(gaps);
    let last = *times.last().expect("nonempty");
    let sample = Sample {
        gaps,
        j: gaps.len() as f64,
        last,
        end: last + tail,
        tail,
        mean_gap: last / gaps.len() as f64,
        times,
    };
    let diverged = |reason: String| Error::FitDiverged { kind: kind.name().into(), reason };

    let (params, at_boundary) = if kind == SrgmKind::Du {
        let denom: f64 = sample.times.iter().map(|&t| (sample.end / t).ln()).sum();
        if !(denom > 0.0) {
            return Err(diverged("all events coincide with the end of observation".into()));
        }
        let beta = sample.j / denom;
        let alpha = sample.j / sample.end.powf(beta);
        (SrgmParams::Du { alpha, beta }, false)
    } else {
        let (f, bounds, starts) = profile(kind, &sample);
        let objective = |x: &[f64]| {
            if !inside(x, &bounds) {
                return f64::INFINITY;
            }
            match f(x) {
                Some((ll, _)) if ll.is_finite() => -ll,
                _ => f64::INFINITY,
            }
        };
        let nm = NelderMead::default();
        let best = starts
            .iter()
            .take(RESTARTS)
            .map(|x0| nm.minimize(objective, x0))
            .min_by(|a, b| a.value.total_cmp(&b.value))
            .expect("at least one start");
        if !best.value.is_finite() {
            return Err(diverged("no finite likelihood found from any start".into()));
        }
        let at_boundary = best
            .x
            .iter()
            .zip(&bounds)
            .any(|(v, (lo, hi))| (v - lo).abs() < 1e-3 || (hi - v).abs() < 1e-3);
        (f(&best.x).expect("finite at optimum").1, at_boundary)
    };
    params.validate(gaps.len()).map_err(|e| diverged(e.to_string()))?;
    let ll = log_likelihood(&params, gaps, tail);
    if !ll.is_finite() {
        return Err(diverged(format!("log-likelihood {ll} at the optimum")));
    }
    let mut u: Vec<f64> = sample
        .times
        .iter()
        .zip(gaps)
        .enumerate()
        .map(|(i, (&t, &g))| params.conditional(i, t - g, 0.0).cdf(g))
        .collect();
    let rescaling_ks = crate::evaluation::ks_distance(&mut u);
    Ok(FittedModel {
        kind,
        params,
        history_length: gaps.len(),
        censored_tail: tail,
        log_likelihood: ll,
        at_boundary,
        rescaling_ks,
    })
}

/// Distribution of the miles to the next failure, measured from the end of
/// the fitted history (after any censored tail). `prefix` must be the data
/// the model was fitted on.
pub fn predict_next(model: &FittedModel, prefix: &[f64]) -> Result<PredictiveDistribution> {
    if prefix.len() != model.history_length {
        return Err(Error::InvalidArgument(format!(
            "model was fitted on {} gaps but {} were supplied",
            model.history_length,
            prefix.len()
        )));
    }
    let last: f64 = prefix.iter().sum();
    Ok(model.params.conditional(prefix.len(), last, model.censored_tail))
}
