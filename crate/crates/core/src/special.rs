//! Special functions evaluated in log space.
//!
//! The regularized incomplete beta function here is written for the regime the
//! reliability calculations live in: one shape parameter of order 1..1e4 and
//! the other up to 1e15, with the argument down to 1e-15. Both `ln x` and
//! `ln(1 - x)` are formed with `ln_1p` on the small side so that
//! `b * ln(1 - x)` keeps full relative precision when `b ~ 1e12`.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{Error, Result};

const CF_MAX_ITER: usize = 1_000_000;
const CF_EPS: f64 = 1e-16;
const CF_TINY: f64 = 1e-300;

/// `k ln x + (n - k) ln(1 - x)`, the log of the Bernoulli likelihood kernel.
///
/// Zero counts contribute nothing even where the logarithm is infinite, so
/// `x = 0` with `k = 0` and `x = 1` with `n = k` are both finite.
pub fn ln_bernoulli_kernel(x: f64, k: f64, n: f64) -> f64 {
    let survivors = n - k;
    let hit = if k > 0.0 { k * x.ln() } else { 0.0 };
    let miss = if survivors > 0.0 {
        survivors * (-x).ln_1p()
    } else {
        0.0
    };
    hit + miss
}

/// Stirling series remainder `ln Γ(x) - [(x - 1/2) ln x - x + ln(2π)/2]`, valid for x >= 10.
fn stirling_remainder(x: f64) -> f64 {
    let r = 1.0 / x;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))))
}

/// `ln B(a, b)`, accurate when one argument is huge and the other moderate.
pub fn ln_beta(a: f64, b: f64) -> f64 {
    let (small, big) = if a < b { (a, b) } else { (b, a) };
    if big < 10.0 {
        return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
    }
    // ln Γ(big) - ln Γ(big + small) without forming either term.
    let diff = -(big - 0.5) * (small / big).ln_1p() - small * (big + small).ln()
        + small
        + stirling_remainder(big)
        - stirling_remainder(big + small);
    ln_gamma(small) + diff
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < CF_TINY {
        d = CF_TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < CF_TINY {
            d = CF_TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < CF_TINY {
            c = CF_TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < CF_EPS {
            return Ok(h);
        }
    }
    Err(Error::NumericFailure(format!(
        "incomplete beta continued fraction did not converge (a = {a:e}, b = {b:e}, x = {x:e})"
    )))
}

const SERIES_MAX_TERMS: f64 = 2e5;

/// `ln(1 + sum_n prod_{i<=n} x (a + b + i) / (a + 1 + i))`, a series of
/// positive terms with `I_x(a, b) = x^a (1 - x)^b / (a B(a, b)) * series`.
fn ln_positive_series(a: f64, b: f64, x: f64) -> f64 {
    const RESCALE: f64 = 1e250;
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut ln_scale = 0.0;
    let mut i = 0.0;
    loop {
        term *= x * (a + b + i) / (a + 1.0 + i);
        sum += term;
        if sum > RESCALE {
            sum /= RESCALE;
            term /= RESCALE;
            ln_scale += RESCALE.ln();
        }
        i += 1.0;
        let ratio = x * (a + b + i) / (a + 1.0 + i);
        if ratio < 1.0 && term * ratio / (1.0 - ratio) < CF_EPS * sum {
            break;
        }
    }
    sum.ln() + ln_scale
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_reg(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "incomplete beta shape parameters must be positive and finite (a = {a}, b = {b})"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidArgument(format!(
            "incomplete beta argument {x} outside [0, 1]"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let (ln_x, ln_y, y) = if x < 0.5 {
        (x.ln(), (-x).ln_1p(), 1.0 - x)
    } else {
        let y = 1.0 - x;
        ((-y).ln_1p(), y.ln(), y)
    };
    let ln_front = a * ln_x + b * ln_y - ln_beta(a, b);
    let lambda = (a + b) * x;
    let series_limit = (a + 1.0 + 10.0 * (a + 1.0).sqrt() + 10.0).min(SERIES_MAX_TERMS);
    let value = if x >= (a + 1.0) / (a + b + 2.0) && x < 0.5 && lambda <= series_limit {
        // The complement's continued fraction would need 1 - (1 - x), losing
        // the relative precision of a tiny x. Further out the complement is
        // negligible and that loss no longer matters.
        (ln_front - a.ln() + ln_positive_series(a, b, x)).exp()
    } else if x < (a + 1.0) / (a + b + 2.0) {
        (ln_front - a.ln()).exp() * beta_continued_fraction(a, b, x)?
    } else {
        1.0 - (ln_front - b.ln()).exp() * beta_continued_fraction(b, a, y)?
    };
    if !value.is_finite() {
        return Err(Error::NumericFailure(format!(
            "incomplete beta produced {value} (a = {a:e}, b = {b:e}, x = {x:e})"
        )));
    }
    Ok(value.clamp(0.0, 1.0))
}

/// Poisson/Gamma limit `P(a, n x)` of `I_x(a, n)` for small `x`.
///
/// Only an approximation (relative error of order `a x`); kept as an
/// independent cross-check of [`beta_reg`] in the tiny-probability regime.
pub fn beta_reg_poisson_limit(a: f64, n: f64, x: f64) -> f64 {
    gamma_lr(a, n * x)
}

/// One-sided standard normal quantile.
pub fn std_normal_quantile(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "normal quantile level {c} outside (0, 1)"
        )));
    }
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    Ok(normal.inverse_cdf(c))
}

/// `1 / (1 + e^l)` without overflow.
pub fn logistic_of_neg(l: f64) -> f64 {
    if l.is_nan() {
        return f64::NAN;
    }
    if l > 0.0 {
        let e = (-l).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + l.exp())
    }
}

/// `ln(e^a + e^b)`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln Σ e^{v_i}`; `-inf` for an empty slice.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    if m == f64::INFINITY {
        return m;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}
