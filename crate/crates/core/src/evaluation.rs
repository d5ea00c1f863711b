//! Prequential evaluation of one-step-ahead predictions: u-plots,
//! recalibration and prequential likelihood ratios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::srgm::{PredictiveDistribution, RollingRun, RollingStep};

/// Log densities below this are floored (and flagged) before differencing.
pub const LOG_DENSITY_FLOOR: f64 = -745.0;
pub const DEFAULT_WARMUP: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    /// Gaps observed before the prediction; the prediction is for gap `index + 1`.
    pub index: usize,
    pub u: f64,
    pub log_density: f64,
    pub floored: bool,
    pub median: Option<f64>,
    pub realized: f64,
}

impl PredictionRecord {
    pub fn from_predictive(index: usize, predictive: &PredictiveDistribution, realized: f64) -> Self {
        let raw = predictive.ln_density(realized);
        let floored = !(raw >= LOG_DENSITY_FLOOR);
        PredictionRecord {
            index,
            u: predictive.cdf(realized).clamp(0.0, 1.0),
            log_density: if floored { LOG_DENSITY_FLOOR } else { raw },
            floored,
            median: predictive.median().ok(),
            realized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UPlot {
    pub sorted_u: Vec<f64>,
    pub ks_distance: f64,
}

/// Kolmogorov distance between the empirical distribution of `u` and the
/// uniform; sorts `u` in place.
pub fn ks_distance(u: &mut [f64]) -> f64 {
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &v)| ((i + 1) as f64 / n - v).max(v - i as f64 / n))
        .fold(0.0, f64::max)
}

pub fn u_plot_values(values: &[f64]) -> Result<UPlot> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("u-plot needs at least one prediction".into()));
    }
    let mut sorted_u = values.to_vec();
    let ks_distance = ks_distance(&mut sorted_u);
    Ok(UPlot { sorted_u, ks_distance })
}

pub fn u_plot(records: &[PredictionRecord]) -> Result<UPlot> {
    u_plot_values(&records.iter().map(|r| r.u).collect::<Vec<_>>())
}

/// Asymptotic two-sided Kolmogorov critical value with Stephens' small-sample
/// correction.
pub fn kolmogorov_critical_value(n: usize, alpha: f64) -> f64 {
    let c = (-0.5 * (alpha / 2.0).ln()).sqrt();
    let rn = (n as f64).sqrt();
    c / (rn + 0.12 + 0.11 / rn)
}

/// Piecewise-linear map through the midpoints of the u-plot steps, anchored
/// at (0, 0) and (1, 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recalibration {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Recalibration {
    pub fn from_u_values(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientWarmup { needed: 1, got: 0 });
        }
        let mut u = values.to_vec();
        u.sort_by(f64::total_cmp);
        let n = u.len() as f64;
        let mut xs = vec![0.0];
        let mut ys = vec![0.0];
        let mut i = 0;
        while i < u.len() {
            let mut k = i;
            while k + 1 < u.len() && u[k + 1] == u[i] {
                k += 1;
            }
            // Tied values share one vertex at the mean of their step midpoints.
            let y = ((i + k) as f64 / 2.0 + 0.5) / n;
            if u[i] > 0.0 && u[i] < 1.0 {
                xs.push(u[i]);
                ys.push(y);
            }
            i = k + 1;
        }
        xs.push(1.0);
        ys.push(1.0);
        Ok(Recalibration { xs, ys })
    }

    pub fn identity() -> Self {
        Recalibration { xs: vec![0.0, 1.0], ys: vec![0.0, 1.0] }
    }

    pub fn vertices(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.ys.iter().copied())
    }

    fn segment(&self, u: f64) -> usize {
        let k = self.xs.partition_point(|&x| x <= u);
        k.clamp(1, self.xs.len() - 1) - 1
    }

    pub fn apply(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let s = self.segment(u);
        let (x0, x1, y0, y1) = (self.xs[s], self.xs[s + 1], self.ys[s], self.ys[s + 1]);
        (y0 + (y1 - y0) * (u - x0) / (x1 - x0)).clamp(0.0, 1.0)
    }

    /// Slope of the segment containing `u` (the right one at a vertex).
    pub fn slope(&self, u: f64) -> f64 {
        let s = self.segment(u.clamp(0.0, 1.0));
        (self.ys[s + 1] - self.ys[s]) / (self.xs[s + 1] - self.xs[s])
    }

    pub fn inverse(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let k = self.ys.partition_point(|&y| y <= q).clamp(1, self.ys.len() - 1) - 1;
        let (x0, x1, y0, y1) = (self.xs[k], self.xs[k + 1], self.ys[k], self.ys[k + 1]);
        (x0 + (x1 - x0) * (q - y0) / (y1 - y0)).clamp(0.0, 1.0)
    }
}

/// Recalibrates `raw` using the u values of `prior_records`, requiring at
/// least [`DEFAULT_WARMUP`] of them.
pub fn recalibrate(raw: &PredictiveDistribution, prior_records: &[PredictionRecord]) -> Result<PredictiveDistribution> {
    recalibrate_with(raw, prior_records, DEFAULT_WARMUP)
}

pub fn recalibrate_with(
    raw: &PredictiveDistribution,
    prior_records: &[PredictionRecord],
    warmup: usize,
) -> Result<PredictiveDistribution> {
    let needed = warmup.max(1);
    if prior_records.len() < needed {
        return Err(Error::InsufficientWarmup { needed, got: prior_records.len() });
    }
    let u: Vec<f64> = prior_records.iter().map(|r| r.u).collect();
    Ok(PredictiveDistribution::recalibrated(raw.clone(), Recalibration::from_u_values(&u)?))
}

/// Recalibrates each predictive in a sequence with the raw records strictly
/// before it. Entries with fewer than `warmup` predecessors are dropped; the
/// returned position refers to the input slice.
pub fn recalibrate_sequence(
    raw: &[(PredictiveDistribution, PredictionRecord)],
    warmup: usize,
) -> Vec<(usize, PredictiveDistribution, PredictionRecord)> {
    let records: Vec<PredictionRecord> = raw.iter().map(|(_, r)| r.clone()).collect();
    raw.iter()
        .enumerate()
        .filter_map(|(i, (predictive, record))| {
            let calibrated = recalibrate_with(predictive, &records[..i], warmup).ok()?;
            let rec = PredictionRecord::from_predictive(record.index, &calibrated, record.realized);
            Some((i, calibrated, rec))
        })
        .collect()
}

/// Recalibrated version of a rolling run (see [`recalibrate_sequence`]).
pub fn recalibrate_run(run: &RollingRun, warmup: usize) -> RollingRun {
    let raw: Vec<_> = run.steps.iter().map(|s| (s.predictive.clone(), s.record.clone())).collect();
    let steps = recalibrate_sequence(&raw, warmup)
        .into_iter()
        .map(|(i, predictive, record)| RollingStep { record, predictive, model: run.steps[i].model.clone() })
        .collect();
    RollingRun { kind: run.kind, steps, skipped: run.skipped.clone() }
}

/// Running log prequential likelihood ratio of A against B.
pub fn plr(records_a: &[PredictionRecord], records_b: &[PredictionRecord]) -> Result<Vec<f64>> {
    if records_a.len() != records_b.len() {
        return Err(Error::MisalignedRecords(format!(
            "{} records against {}",
            records_a.len(),
            records_b.len()
        )));
    }
    let mut total = 0.0;
    records_a
        .iter()
        .zip(records_b)
        .map(|(a, b)| {
            if a.index != b.index || a.realized != b.realized {
                return Err(Error::MisalignedRecords(format!("index {} against {}", a.index, b.index)));
            }
            total += a.log_density - b.log_density;
            Ok(total)
        })
        .collect()
}

/// Records of `a` and `b` restricted to the indices both contain.
pub fn align(a: &[PredictionRecord], b: &[PredictionRecord]) -> (Vec<PredictionRecord>, Vec<PredictionRecord>) {
    let keep_b: std::collections::HashMap<usize, &PredictionRecord> = b.iter().map(|r| (r.index, r)).collect();
    a.iter()
        .filter_map(|ra| keep_b.get(&ra.index).map(|rb| (ra.clone(), (*rb).clone())))
        .unzip()
}

/// Median of the finite values (the consensus of several predictors).
pub fn consensus(values: &[f64]) -> Option<f64> {
    let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(index: usize, u: f64, ld: f64) -> PredictionRecord {
        PredictionRecord { index, u, log_density: ld, floored: false, median: None, realized: 1.0 }
    }

    #[test]
    fn constant_half_has_distance_half() {
        let records: Vec<_> = (0..10).map(|i| rec(i, 0.5, 0.0)).collect();
        assert_eq!(u_plot(&records).unwrap().ks_distance, 0.5);
    }

    #[test]
    fn perfect_grid_has_half_step_distance() {
        let u: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((u_plot_values(&u).unwrap().ks_distance - 0.005).abs() < 1e-12);
    }

    #[test]
    fn empty_u_plot_is_an_error() {
        assert!(u_plot(&[]).is_err());
    }

    #[test]
    fn critical_value_near_tabulated() {
        // Tabulated 5% value for n = 1000 is about 0.0430.
        assert!((kolmogorov_critical_value(1000, 0.05) - 0.0430).abs() < 5e-4);
    }

    #[test]
    fn diagonal_u_plot_recalibrates_to_identity() {
        let u: Vec<f64> = (0..50).map(|i| (i as f64 + 0.5) / 50.0).collect();
        let g = Recalibration::from_u_values(&u).unwrap();
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            assert!((g.apply(x) - x).abs() < 1e-12);
            assert!((g.slope(x) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn recalibration_is_monotone_and_invertible() {
        let g = Recalibration::from_u_values(&[0.9, 0.2, 0.2, 0.95, 0.6, 0.0, 1.0]).unwrap();
        assert_eq!(g.apply(0.0), 0.0);
        assert_eq!(g.apply(1.0), 1.0);
        let mut prev = 0.0;
        for k in 1..=1000 {
            let x = k as f64 / 1000.0;
            let y = g.apply(x);
            assert!(y >= prev);
            assert!((g.inverse(y) - x).abs() < 1e-9);
            prev = y;
        }
    }

    #[test]
    fn recalibrated_u_is_polygon_of_raw_u() {
        let raw = PredictiveDistribution::Exponential { rate: 0.5 };
        let prior: Vec<_> = (0..25).map(|i| rec(i, ((i * 7) % 25) as f64 / 25.0 * 0.8 + 0.1, 0.0)).collect();
        let cal = recalibrate(&raw, &prior).unwrap();
        let PredictiveDistribution::Recalibrated { map, .. } = &cal else { panic!() };
        for x in [0.1, 1.0, 3.0, 10.0] {
            assert_eq!(cal.cdf(x), map.apply(raw.cdf(x)));
        }
        assert_eq!(
            recalibrate(&raw, &prior[..5]).unwrap_err(),
            Error::InsufficientWarmup { needed: 20, got: 5 }
        );
    }

    #[test]
    fn plr_identities() {
        let a: Vec<_> = (0..5).map(|i| rec(i, 0.5, -(i as f64))).collect();
        let b: Vec<_> = (0..5).map(|i| rec(i, 0.5, -2.0)).collect();
        assert!(plr(&a, &a).unwrap().iter().all(|&v| v == 0.0));
        let ab = plr(&a, &b).unwrap();
        let ba = plr(&b, &a).unwrap();
        assert!(ab.iter().zip(&ba).all(|(x, y)| *x == -*y));
        assert_eq!(*ab.last().unwrap(), (0.0 - 1.0 - 2.0 - 3.0 - 4.0) + 10.0);
        assert!(matches!(plr(&a, &b[..3]), Err(Error::MisalignedRecords(_))));
        let mut shifted = b.clone();
        shifted[2].index = 9;
        assert!(plr(&a, &shifted).is_err());
    }

    #[test]
    fn floors_impossible_outcomes() {
        let r = PredictionRecord::from_predictive(0, &PredictiveDistribution::Exponential { rate: 1.0 }, 1e4);
        assert!(r.floored);
        assert_eq!(r.log_density, LOG_DENSITY_FLOOR);
    }

    #[test]
    fn consensus_is_median() {
        assert_eq!(consensus(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(consensus(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(consensus(&[]), None);
    }
}
