use crate::data::FailureHistory;
use crate::error::Result;
use crate::evaluation::{self, consensus, recalibrate_run, Recalibration, DEFAULT_WARMUP};

use super::{final_forecast, rolling_predictions_with, PredictiveDistribution, RollingOptions, RollingRun, SrgmKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisOptions {
    pub rolling: RollingOptions,
    pub warmup: usize,
    /// Treat the miles after the last event as censored exposure in the final forecast.
    pub include_tail: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { rolling: RollingOptions::default(), warmup: DEFAULT_WARMUP, include_tail: true }
    }
}

#[derive(Debug, Clone)]
pub struct KindAnalysis {
    pub kind: SrgmKind,
    pub raw: RollingRun,
    pub recalibrated: RollingRun,
    pub ks_raw: Option<f64>,
    pub ks_recalibrated: Option<f64>,
    /// Median miles to the next failure after the whole history.
    pub final_median_raw: Result<f64>,
    pub final_median_recalibrated: Result<f64>,
}

#[derive(Debug, Clone)]
pub struct SrgmAnalysis {
    pub kinds: Vec<KindAnalysis>,
    pub consensus_raw: Option<f64>,
    pub consensus_recalibrated: Option<f64>,
}

/// Rolling predictions, recalibration and final forecasts for each model.
pub fn analyze_history(history: &FailureHistory, kinds: &[SrgmKind], options: &AnalysisOptions) -> Result<SrgmAnalysis> {
    let per_kind: Vec<Result<KindAnalysis>> = kinds.iter().map(|&kind| {
        let raw = rolling_predictions_with(kind, &history.interfailure_miles, &options.rolling)?;
        let recalibrated = recalibrate_run(&raw, options.warmup);
        let ks = |run: &RollingRun| evaluation::u_plot(&run.records()).ok().map(|u| u.ks_distance);
        let forecast = final_forecast(kind, history, options.include_tail);
        let final_median_raw = forecast.as_ref().map_err(Clone::clone).and_then(|(_, p)| p.median());
        let final_median_recalibrated = forecast.and_then(|(_, p)| {
            let u: Vec<f64> = raw.steps.iter().map(|s| s.record.u).collect();
            if u.len() < options.warmup.max(1) {
                return Err(crate::Error::InsufficientWarmup { needed: options.warmup.max(1), got: u.len() });
            }
            PredictiveDistribution::recalibrated(p, Recalibration::from_u_values(&u)?).median()
        });
        Ok(KindAnalysis {
            kind,
            ks_raw: ks(&raw),
            ks_recalibrated: ks(&recalibrated),
            raw,
            recalibrated,
            final_median_raw,
            final_median_recalibrated,
        })
    }).collect();
    let kinds = per_kind.into_iter().collect::<Result<Vec<_>>>()?;
    let finals = |f: fn(&KindAnalysis) -> Option<f64>| consensus(&kinds.iter().filter_map(f).collect::<Vec<_>>());
    let consensus_raw = finals(|k| k.final_median_raw.as_ref().ok().copied());
    let consensus_recalibrated = finals(|k| k.final_median_recalibrated.as_ref().ok().copied());
    Ok(SrgmAnalysis { kinds, consensus_raw, consensus_recalibrated })
}
