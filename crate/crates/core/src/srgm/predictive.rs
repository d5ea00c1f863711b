use crate::error::{Error, Result};
use crate::evaluation::Recalibration;
use crate::root::{bisect, bracket_upward, Tolerance};

use super::SrgmParams;

/// One-step-ahead distribution of the miles to the next failure.
#[derive(Debug, Clone, PartialEq)]
pub enum PredictiveDistribution {
    Exponential { rate: f64 },
    /// Next event of an NHPP observed up to cumulative miles `origin`.
    Nhpp { params: SrgmParams, origin: f64 },
    /// `P(T > x) = (scale / (scale + x))^shape`.
    Pareto { scale: f64, shape: f64 },
    /// `G(F(x))` for a raw predictive `F` and recalibration map `G`.
    Recalibrated { base: Box<PredictiveDistribution>, map: Recalibration },
}

impl PredictiveDistribution {
    pub fn recalibrated(base: PredictiveDistribution, map: Recalibration) -> Self {
        PredictiveDistribution::Recalibrated { base: Box::new(base), map }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            PredictiveDistribution::Exponential { rate } => -(-rate * x).exp_m1(),
            PredictiveDistribution::Nhpp { params, origin } => -(-params.increment(*origin, x)).exp_m1(),
            PredictiveDistribution::Pareto { scale, shape } => -(-shape * (x / scale).ln_1p()).exp_m1(),
            PredictiveDistribution::Recalibrated { base, map } => map.apply(base.cdf(x)),
        }
    }

    pub fn ln_density(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        match self {
            PredictiveDistribution::Exponential { rate } => rate.ln() - rate * x,
            PredictiveDistribution::Nhpp { params, origin } => {
                params.ln_intensity(origin + x) - params.increment(*origin, x)
            }
            PredictiveDistribution::Pareto { scale, shape } => {
                shape.ln() - scale.ln() - (shape + 1.0) * (x / scale).ln_1p()
            }
            PredictiveDistribution::Recalibrated { base, map } => map.slope(base.cdf(x)).ln() + base.ln_density(x),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }

    /// `lim cdf(x)` as `x -> inf`; below 1 for a defective predictive.
    pub fn limit(&self) -> f64 {
        match self {
            PredictiveDistribution::Nhpp { params: SrgmParams::Go { a, b }, origin } => {
                -(-a * (-b * origin).exp()).exp_m1()
            }
            PredictiveDistribution::Recalibrated { base, map } => map.apply(base.limit()),
            _ => 1.0,
        }
    }

    /// Smallest `x` with `cdf(x) >= q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidArgument(format!("quantile level must lie in (0, 1), got {q}")));
        }
        let limit = self.limit();
        if limit <= q {
            return Err(Error::NoFiniteMedian { limit });
        }
        match self {
            PredictiveDistribution::Exponential { rate } => Ok(-(-q).ln_1p() / rate),
            PredictiveDistribution::Pareto { scale, shape } => Ok(scale * (-(-q).ln_1p() / shape).exp_m1()),
            PredictiveDistribution::Recalibrated { base, map } => base.quantile(map.inverse(q)),
            PredictiveDistribution::Nhpp { .. } => {
                let (lo, hi) = bracket_upward(|x| self.cdf(x) >= q, 1e-12, 4.0, f64::MAX / 8.0)
                    .ok_or_else(|| Error::NumericFailure("could not bracket the quantile".into()))?;
                Ok(bisect(|x| self.cdf(x) >= q, lo, hi, Tolerance::relative(1e-14)))
            }
        }
    }

    /// Median miles to the next failure.
    pub fn median(&self) -> Result<f64> {
        self.quantile(0.5)
    }
}
