use serde::{Deserialize, Serialize};

use crate::data::FailureHistory;
use crate::error::{Error, Result};
use crate::evaluation::PredictionRecord;
use crate::exec::Parallelism;

use super::{fit_with, predict_next, FitOptions, FittedModel, PredictiveDistribution, SrgmKind};
use super::{DEFAULT_ROLLING_START, MIN_FIT_GAPS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingOptions {
    pub start: usize,
    pub min_history: usize,
    pub parallelism: Parallelism,
}

impl Default for RollingOptions {
    fn default() -> Self {
        RollingOptions { start: DEFAULT_ROLLING_START, min_history: MIN_FIT_GAPS, parallelism: Parallelism::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingStep {
    pub record: PredictionRecord,
    pub predictive: PredictiveDistribution,
    pub model: FittedModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedStep {
    pub index: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingRun {
    pub kind: SrgmKind,
    pub steps: Vec<RollingStep>,
    pub skipped: Vec<SkippedStep>,
}

impl RollingRun {
    pub fn records(&self) -> Vec<PredictionRecord> {
        self.steps.iter().map(|s| s.record.clone()).collect()
    }
}

/// One-step-ahead records for an arbitrary predictor: for each prefix length
/// `j` in `start..gaps.len()`, `predictor(&gaps[..j])` is scored on `gaps[j]`.
pub fn prequential_records<F>(gaps: &[f64], start: usize, predictor: F) -> Vec<Result<PredictionRecord>>
where
    F: Fn(&[f64]) -> Result<PredictiveDistribution>,
{
    (start..gaps.len())
        .map(|j| predictor(&gaps[..j]).map(|p| PredictionRecord::from_predictive(j, &p, gaps[j])))
        .collect()
}

pub fn rolling_predictions(kind: SrgmKind, gaps: &[f64], start: usize) -> Result<RollingRun> {
    rolling_predictions_with(kind, gaps, &RollingOptions { start, ..Default::default() })
}

/// Fits `kind` to every prefix from `options.start` on and predicts the next
/// gap. Steps whose fit fails are listed in `skipped`.
pub fn rolling_predictions_with(kind: SrgmKind, gaps: &[f64], options: &RollingOptions) -> Result<RollingRun> {
    if options.start < options.min_history {
        return Err(Error::InsufficientHistory { needed: options.min_history, got: options.start });
    }
    let fit_options = FitOptions { censored_tail: 0.0, min_history: options.min_history };
    let count = gaps.len().saturating_sub(options.start);
    let outcomes = options.parallelism.map_range(count, |i| {
        let j = options.start + i;
        let prefix = &gaps[..j];
        fit_with(kind, prefix, &fit_options).and_then(|model| {
            let predictive = predict_next(&model, prefix)?;
            let record = PredictionRecord::from_predictive(j, &predictive, gaps[j]);
            Ok(RollingStep { record, predictive, model })
        })
    });
    let mut steps = Vec::with_capacity(count);
    let mut skipped = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(step) => steps.push(step),
            Err(e) => {
                let index = options.start + i;
                log::debug!("{kind} step {index} skipped: {e}");
                skipped.push(SkippedStep { index, error: e.to_string() });
            }
        }
    }
    Ok(RollingRun { kind, steps, skipped })
}

/// Forecast of the miles to the next failure after the whole history. With
/// `include_tail`, the miles since the last event enter the fit as censored
/// exposure and the forecast is measured from the end of observation.
pub fn final_forecast(
    kind: SrgmKind,
    history: &FailureHistory,
    include_tail: bool,
) -> Result<(FittedModel, PredictiveDistribution)> {
    let censored_tail = if include_tail { history.censored_tail } else { 0.0 };
    let model = fit_with(kind, &history.interfailure_miles, &FitOptions { censored_tail, ..Default::default() })?;
    let predictive = predict_next(&model, &history.interfailure_miles)?;
    Ok((model, predictive))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn produces_one_record_per_remaining_gap() {
        let gaps = simulate::homogeneous_gaps(0.1, 80, &mut ChaCha8Rng::seed_from_u64(4));
        let run = rolling_predictions(SrgmKind::Du, &gaps, 60).unwrap();
        assert_eq!(run.steps.len() + run.skipped.len(), 20);
        for (k, s) in run.steps.iter().enumerate() {
            assert!((0.0..=1.0).contains(&s.record.u));
            if run.skipped.is_empty() {
                assert_eq!(s.record.index, 60 + k);
            }
        }
    }

    #[test]
    fn start_below_minimum_is_rejected() {
        assert!(matches!(
            rolling_predictions(SrgmKind::Mo, &[1.0; 40], 5),
            Err(Error::InsufficientHistory { needed: 10, got: 5 })
        ));
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let gaps = simulate::musa_okumoto_gaps(0.05, 0.02, 90, &mut ChaCha8Rng::seed_from_u64(8));
        let seq = RollingOptions { start: 70, parallelism: Parallelism::Sequential, ..Default::default() };
        let par = RollingOptions { parallelism: Parallelism::Parallel, ..seq };
        for kind in SrgmKind::ALL {
            assert_eq!(
                rolling_predictions_with(kind, &gaps, &seq).unwrap(),
                rolling_predictions_with(kind, &gaps, &par).unwrap()
            );
        }
    }
}
