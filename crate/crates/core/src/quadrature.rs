//! Tanh-sinh quadrature of integrands given by their logarithm.
//!
//! Integrals are returned as logarithms so that posterior masses of order
//! `e^{-1e9}` remain representable. The integrand receives both `x` and
//! `1 - x`, each computed from the nearer endpoint, so integrable endpoint
//! singularities at 0 and 1 are resolved.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::special::log_sum_exp;

const MAX_LEVEL: u32 = 12;
const T_MAX: f64 = 6.0;

/// `ln ∫_lo^hi exp(ln_f(x, 1 - x)) dx` on a single interval.
fn tanh_sinh_log<F>(ln_f: &F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let half = 0.5 * (hi - lo);
    if half <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    let ln_half = half.ln();
    let mid = lo + half;
    // Log-weighted integrand values at +t and -t.
    let node_terms = |t: f64, out: &mut Vec<f64>| {
        let s = FRAC_PI_2 * t.sinh();
        let e = (-2.0 * s).exp();
        let gap = half * 2.0 * e / (1.0 + e);
        if gap <= 0.0 {
            return;
        }
        // ln cosh s = s - ln 2 + ln(1 + e^{-2s})
        let ln_cosh_s = s - std::f64::consts::LN_2 + e.ln_1p();
        let ln_w = FRAC_PI_2.ln() + t.cosh().ln() - 2.0 * ln_cosh_s + ln_half;
        let (xl, yl) = (lo + gap, (1.0 - lo) - gap);
        let (xr, yr) = (hi - gap, (1.0 - hi) + gap);
        out.push(ln_w + ln_f(xl, yl));
        out.push(ln_w + ln_f(xr, yr));
    };

    let mut terms = vec![FRAC_PI_2.ln() + ln_half + ln_f(mid, 1.0 - mid)];
    let mut h = 1.0;
    let mut k = 1.0;
    while k * h <= T_MAX {
        node_terms(k * h, &mut terms);
        k += 1.0;
    }
    let mut previous = h.ln() + log_sum_exp(&terms);
    for _ in 1..=MAX_LEVEL {
        h *= 0.5;
        // New nodes are the odd multiples of the halved step.
        let mut j = 1.0;
        while j * h <= T_MAX {
            node_terms(j * h, &mut terms);
            j += 2.0;
        }
        let current = h.ln() + log_sum_exp(&terms);
        if current.is_nan() {
            return Err(Error::NumericFailure("quadrature produced NaN".into()));
        }
        if current == f64::NEG_INFINITY || (current - previous).abs() < tol {
            return Ok(current);
        }
        previous = current;
    }
    Ok(previous)
}

/// `ln ∫_lo^hi exp(ln_f(x, 1 - x)) dx`, splitting at every breakpoint inside
/// the interval (put them at peaks and kinks of the integrand).
pub fn integrate_log<F>(ln_f: F, lo: f64, hi: f64, breakpoints: &[f64], tol: f64) -> Result<f64>
where
    F: Fn(f64, f64) -> f64,
{
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|b| *b > lo && *b < hi && b.is_finite())
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces = cuts
        .windows(2)
        .map(|w| tanh_sinh_log(&ln_f, w[0], w[1], tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(log_sum_exp(&pieces))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial() {
        let v = integrate_log(|x, _| 2.0 * x.ln(), 0.0, 1.0, &[], 1e-13).unwrap();
        assert_relative_eq!(v.exp(), 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn endpoint_singularities() {
        // ∫ x^{-1/2} (1-x)^{-1/2} = π
        let v = integrate_log(|x, y| -0.5 * x.ln() - 0.5 * y.ln(), 0.0, 1.0, &[], 1e-13).unwrap();
        assert_relative_eq!(v.exp(), std::f64::consts::PI, max_relative = 1e-10);
    }

    #[test]
    fn sharp_peak_with_breakpoints() {
        // ∫ (1-x)^n = 1/(n+1) for n = 1e9; all mass within 1e-8 of 0.
        let n = 1e9;
        let bps: Vec<f64> = (0..12).map(|j| 2f64.powi(j) / n).collect();
        let v = integrate_log(|x: f64, y: f64| n * if x < 0.5 { (-x).ln_1p() } else { y.ln() }, 0.0, 1.0, &bps, 1e-13).unwrap();
        assert_relative_eq!(v, -(n + 1.0).ln(), max_relative = 1e-10);
    }
}
