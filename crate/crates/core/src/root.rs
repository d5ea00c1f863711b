//! Bracketing and bisection on monotone predicates.
//!
//! Every solver in the crate is phrased as "find the smallest `x` for which a
//! monotone predicate becomes true". Bisection keeps the invariant
//! `!pred(lo) && pred(hi)` and returns `hi`, so the returned point always
//! satisfies the predicate.

/// Stopping rule for bisection: stop when `hi - lo <= atol + rtol * |hi|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-12,
        }
    }
}

impl Tolerance {
    /// Bisect until adjacent floating point values.
    pub const MACHINE: Tolerance = Tolerance { rtol: 0.0, atol: 0.0 };

    pub fn relative(rtol: f64) -> Self {
        Self { rtol, atol: 0.0 }
    }
}

const MAX_BISECTIONS: usize = 4096;

/// Shrinks `[lo, hi]` with `!pred(lo)` and `pred(hi)` and returns the final `hi`.
pub fn bisect<P>(mut pred: P, mut lo: f64, mut hi: f64, tol: Tolerance) -> f64
where
    P: FnMut(f64) -> bool,
{
    debug_assert!(lo <= hi);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= tol.atol + tol.rtol * hi.abs() {
            break;
        }
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Geometric search upward from `start` (which must fail the predicate) for a
/// point satisfying it. Returns `(lo, hi)` or `None` once `limit` is passed.
pub fn bracket_upward<P>(mut pred: P, start: f64, factor: f64, limit: f64) -> Option<(f64, f64)>
where
    P: FnMut(f64) -> bool,
{
    debug_assert!(factor > 1.0);
    let mut lo = start;
    let mut hi = if start > 0.0 { start * factor } else { 1.0 };
    while hi <= limit {
        if pred(hi) {
            return Some((lo, hi));
        }
        lo = hi;
        hi *= factor;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_square_root() {
        let r = bisect(|x| x * x >= 2.0, 0.0, 2.0, Tolerance::MACHINE);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(r * r >= 2.0);
    }

    #[test]
    fn bisect_respects_relative_tolerance() {
        let r = bisect(|x| x >= 1234.5, 0.0, 1e6, Tolerance::relative(1e-9));
        assert!(r >= 1234.5 && r - 1234.5 <= 1e-9 * r);
    }

    #[test]
    fn bracket_grows_geometrically() {
        let (lo, hi) = bracket_upward(|x| x >= 1000.0, 1.0, 2.0, 1e300).unwrap();
        assert!(lo < 1000.0 && hi >= 1000.0);
        assert_eq!(hi, 1024.0);
        assert!(bracket_upward(|_| false, 1.0, 2.0, 1e10).is_none());
    }

    #[test]
    fn bracket_from_zero_starts_at_one() {
        let (lo, hi) = bracket_upward(|x| x >= 0.5, 0.0, 2.0, 10.0).unwrap();
        assert_eq!((lo, hi), (0.0, 1.0));
    }
}
