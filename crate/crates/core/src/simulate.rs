//! Synthetic failure histories for tests and benchmarks.

use rand::Rng;

fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -(1.0 - rng.random::<f64>()).ln()
}

/// Gaps of a homogeneous Poisson process with the given rate.
pub fn homogeneous_gaps<R: Rng + ?Sized>(rate: f64, count: usize, rng: &mut R) -> Vec<f64> {
    (0..count).map(|_| unit_exponential(rng) / rate).collect()
}

/// Event times of an NHPP by inverting its mean-value function. `inverse_mean`
/// returns `None` once the process has no more events (finite total mean).
pub fn nhpp_event_times<R, F>(inverse_mean: F, count: usize, rng: &mut R) -> Vec<f64>
where
    R: Rng + ?Sized,
    F: Fn(f64) -> Option<f64>,
{
    let mut s = 0.0;
    let mut times = Vec::with_capacity(count);
    for _ in 0..count {
        s += unit_exponential(rng);
        match inverse_mean(s) {
            Some(t) => times.push(t),
            None => break,
        }
    }
    times
}

pub fn gaps_from_times(times: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    times
        .iter()
        .map(|&t| {
            let g = t - prev;
            prev = t;
            g
        })
        .collect()
}

/// Goel–Okumoto process `m(t) = a (1 - exp(-b t))`; stops early if the
/// expected total `a` is exhausted.
pub fn goel_okumoto_gaps<R: Rng + ?Sized>(a: f64, b: f64, count: usize, rng: &mut R) -> Vec<f64> {
    let times = nhpp_event_times(|s| (s < a).then(|| -(-s / a).ln_1p() / b), count, rng);
    gaps_from_times(&times)
}

/// Musa–Okumoto process `m(t) = ln(1 + lambda0 theta t) / theta`.
pub fn musa_okumoto_gaps<R: Rng + ?Sized>(lambda0: f64, theta: f64, count: usize, rng: &mut R) -> Vec<f64> {
    let times = nhpp_event_times(|s| Some((theta * s).exp_m1() / (lambda0 * theta)), count, rng);
    gaps_from_times(&times)
}

/// Duane process `m(t) = alpha t^beta`.
pub fn duane_gaps<R: Rng + ?Sized>(alpha: f64, beta: f64, count: usize, rng: &mut R) -> Vec<f64> {
    let times = nhpp_event_times(|s| Some((s / alpha).powf(1.0 / beta)), count, rng);
    gaps_from_times(&times)
}

/// Gaps whose i-th draw is exponential with rate `rate * (1 + drift i)`, i.e. a
/// history that improves faster (drift > 0) than a fixed-rate model assumes.
pub fn drifting_exponential_gaps<R: Rng + ?Sized>(rate: f64, drift: f64, count: usize, rng: &mut R) -> Vec<f64> {
    (0..count)
        .map(|i| unit_exponential(rng) / (rate * (1.0 + drift * i as f64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn homogeneous_mean_matches_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = homogeneous_gaps(0.01, 20_000, &mut rng);
        let mean = g.iter().sum::<f64>() / g.len() as f64;
        assert!((mean - 100.0).abs() < 3.0, "{mean}");
    }

    #[test]
    fn goel_okumoto_count_is_finite() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = goel_okumoto_gaps(50.0, 1e-3, 10_000, &mut rng);
        assert!(g.len() < 100);
        assert!(g.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn musa_okumoto_gaps_lengthen() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = musa_okumoto_gaps(0.01, 0.02, 400, &mut rng);
        let early: f64 = g[..100].iter().sum();
        let late: f64 = g[300..].iter().sum();
        assert!(late > 3.0 * early);
    }
}
