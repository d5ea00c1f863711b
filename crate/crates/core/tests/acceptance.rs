//! Acceptance criteria, one PASS/FAIL line each.

use std::process::ExitCode;
use std::time::Instant;

type Criterion = (&'static str, fn(&mut Report));

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reliab_core::baseline::{
    beta_posterior_confidence, beta_required_miles_with, classical_failure_free_miles, rand_power_miles, BetaPrior,
};
use reliab_core::cbi::{
    compensation_miles, n_star, p_star, required_miles, worst_case_posterior_confidence, Observation,
    PriorConstraints, ReliabilityClaim,
};
use reliab_core::data::{bundled_fixture, expand_to_interfailure};
use reliab_core::evaluation::{
    kolmogorov_critical_value, plr, recalibrate_sequence, u_plot, u_plot_values, PredictionRecord,
};
use reliab_core::oracle::minimize_over_feasible_priors;
use reliab_core::root::Tolerance;
use reliab_core::simulate;
use reliab_core::srgm::{analyze_history, rolling_predictions, AnalysisOptions, PredictiveDistribution, SrgmKind};
use reliab_core::Error;

const GOAL: f64 = 1.09e-10;
const FLOOR: f64 = 1e-15;

struct Report {
    failures: usize,
}

impl Report {
    fn line(&mut self, id: &str, ok: bool, detail: String) {
        println!("criterion {id}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failures += 1;
        }
    }
}

fn rel(got: f64, want: f64) -> f64 {
    (got / want - 1.0).abs()
}

fn claim(p: f64, c: f64) -> ReliabilityClaim {
    ReliabilityClaim::new(p, c).unwrap()
}

fn constraints(theta: f64) -> PriorConstraints {
    PriorConstraints::new(GOAL, theta, FLOOR).unwrap()
}

fn criterion_1(r: &mut Report) {
    let cl = claim(1.09e-8, 0.95);
    let classical = classical_failure_free_miles(&cl).unwrap();
    let cbi_09 = required_miles(&constraints(0.9), 0, &cl).unwrap();
    let cbi_01 = required_miles(&constraints(0.1), 0, &cl).unwrap();
    let checks = [(classical, 275e6), (cbi_09, 69e6), (cbi_01, 476e6)];
    let ok = checks.iter().all(|&(g, w)| rel(g, w) <= 0.01);
    r.line(
        "1 (failure-free miles, tol 1%)",
        ok,
        format!("classical {classical:.4e} vs 2.75e8, theta=0.9 {cbi_09:.4e} vs 6.9e7, theta=0.1 {cbi_01:.4e} vs 4.76e8"),
    );
}

fn criterion_2(r: &mut Report) {
    let cs = constraints(0.9);
    let (p43, p1) = (8.72e-9, 4.12e-9);
    let tol = Tolerance::default();
    let cells = [
        ("CBI k=43", required_miles(&cs, 43, &claim(p43, 0.95)).unwrap(), 7.89e10),
        ("CBI k=1", required_miles(&cs, 1, &claim(p1, 0.95)).unwrap(), 3.88e9),
        ("Uniform k=43", beta_required_miles_with(&BetaPrior::UNIFORM, 43, &claim(p43, 0.95), tol).unwrap(), 6.40e9),
        ("Uniform k=1", beta_required_miles_with(&BetaPrior::UNIFORM, 1, &claim(p1, 0.95), tol).unwrap(), 1.15e9),
        ("Jeffreys k=43", beta_required_miles_with(&BetaPrior::JEFFREYS, 43, &claim(p43, 0.95), tol).unwrap(), 6.33e9),
        ("Jeffreys k=1", beta_required_miles_with(&BetaPrior::JEFFREYS, 1, &claim(p1, 0.95), tol).unwrap(), 9.48e8),
        ("power k=43", rand_power_miles(p43, 1.09e-8, 0.95).unwrap(), 4.97e9),
    ];
    let ok = cells.iter().all(|&(_, g, w)| rel(g, w) <= 0.01);
    let detail = cells
        .iter()
        .map(|(name, g, w)| format!("{name} {g:.3e}/{w:.2e}"))
        .collect::<Vec<_>>()
        .join(", ");
    r.line("2 (table, tol 1%)", ok, format!("{detail}; classical k=1 (2.43e8) not reproduced: method unstated"));
}

fn criterion_3(r: &mut Report) {
    let cs = PriorConstraints::new(1e-4, 0.9, FLOOR).unwrap();
    let cl = claim(1e-3, 0.95);
    let cbi = required_miles(&cs, 0, &cl).unwrap();
    let classical = classical_failure_free_miles(&cl).unwrap();
    let ratio = classical / cbi;
    r.line(
        "3 (short-horizon claim)",
        cbi < 1000.0 && (2.0..=4.0).contains(&ratio),
        format!("CBI {cbi:.2} miles (< 1000), classical/CBI {ratio:.3} (in [2, 4])"),
    );
}

fn criterion_4(r: &mut Report) {
    let settings = [(0.9, 0.5), (0.9, 0.9), (0.95, 0.5), (0.95, 0.9)];
    let mut ok = true;
    let mut notes = Vec::new();
    let mut degenerate = Vec::new();
    let mut n_stars = Vec::new();
    let mut asymptotes = Vec::new();
    for (c, theta) in settings {
        let cs = constraints(theta);
        let ns = n_star(&cs).unwrap();
        n_stars.push(ns);
        match compensation_miles(&cs, 1e14, c) {
            Ok(res) => asymptotes.push(res.n2),
            Err(Error::CompensationUndefined(_)) if c <= theta => degenerate.push((c, theta)),
            Err(e) => {
                ok = false;
                notes.push(format!("c={c} theta={theta}: {e}"));
            }
        }
    }
    let ns = n_stars[3];
    let ps = p_star(&constraints(0.9), 0.95).unwrap();
    let inverse_goal = 1.0 / GOAL;
    ok &= rel(ns, 1.06e11) <= 0.01;
    ok &= rel(ps, 1.16e-10) <= 0.02;
    ok &= n_stars.iter().all(|&v| v == ns);
    ok &= asymptotes.iter().all(|&v| rel(v, inverse_goal) <= 0.01);
    let spread = asymptotes.iter().fold(0.0f64, |m, &v| m.max(rel(v, asymptotes[0])));
    r.line(
        "4 (compensation curve)",
        ok,
        format!(
            "n* {ns:.4e} vs 1.06e11 (1%), p* {ps:.4e} vs 1.16e-10 (2%), n2(1e14) {:.4e} vs 1/eps {inverse_goal:.4e} (1%), \
             n* identical over 4 settings, asymptote spread {spread:.1e} over {} settings{}",
            asymptotes[0],
            asymptotes.len(),
            notes.join("; ")
        ),
    );
    for (c, theta) in degenerate {
        // With c <= theta the prior alone already meets the target, so every
        // p > eps is supported and re-establishing confidence after a failure
        // needs unbounded miles: n2 has no value to compare.
        println!(
            "criterion 4 (asymptote at c={c}, theta={theta}): FAIL | n2 undefined for c <= theta; \
             reported as CompensationUndefined, not a finite curve"
        );
    }
}

fn criterion_5(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_undercut: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for _ in 0..200 {
        let p_l = 10f64.powf(rng.random_range(-4.0..-2.0));
        let eps = p_l * rng.random_range(2.0..50.0);
        let p = (eps * rng.random_range(1.2..20.0)).min(0.95);
        let theta = rng.random_range(0.05..0.95);
        let k: u64 = rng.random_range(0..=20);
        let n = rng.random_range(k as f64..=200.0).max(k as f64);
        let cs = PriorConstraints::new(eps, theta, p_l).unwrap();
        let obs = Observation::new(k, n).unwrap();
        let theorem = worst_case_posterior_confidence(&cs, &obs, p).unwrap();
        let (oracle, _) = minimize_over_feasible_priors(&cs, &obs, p, 2000).unwrap();
        worst_undercut = worst_undercut.max(theorem - oracle);
        worst_gap = worst_gap.max((oracle - theorem).abs());
    }
    r.line(
        "5 (oracle, 200 tuples, grid 2000, tol 1e-6)",
        worst_undercut <= 1e-6 && worst_gap <= 1e-6,
        format!("max undercut {worst_undercut:.2e}, max |oracle - theorem| {worst_gap:.2e}"),
    );
}

fn criterion_6(r: &mut Report) {
    let mut worst: f64 = 0.0;
    for p in [0.5, 1e-2, 1e-4, 1e-6, 1.09e-8] {
        for c in [0.5, 0.9, 0.95, 0.99] {
            let cl = claim(p, c);
            let classical = classical_failure_free_miles(&cl).unwrap();
            let bayes = beta_required_miles_with(&BetaPrior::UNIFORM, 0, &cl, Tolerance::MACHINE).unwrap();
            worst = worst.max(((classical - bayes) - 1.0).abs() / classical.max(1.0));
        }
    }
    r.line(
        "6 (classical = Beta(1,1) + 1, 20 points, rel tol 1e-9)",
        worst <= 1e-9,
        format!("worst relative deviation {worst:.2e}; the classical count is the larger one"),
    );
}

fn true_rate_ks(seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = simulate::homogeneous_gaps(1e-3, 500, &mut rng);
    let predictor = PredictiveDistribution::Exponential { rate: 1e-3 };
    let u: Vec<f64> = gaps.iter().map(|&g| predictor.cdf(g)).collect();
    (u_plot_values(&u).unwrap().ks_distance, kolmogorov_critical_value(u.len(), 0.05))
}

fn biased_ks(seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = simulate::homogeneous_gaps(1.0, 300, &mut rng);
    let predictor = PredictiveDistribution::Exponential { rate: 0.5 };
    let raw: Vec<(PredictiveDistribution, PredictionRecord)> = gaps
        .iter()
        .enumerate()
        .map(|(i, &g)| (predictor.clone(), PredictionRecord::from_predictive(i, &predictor, g)))
        .collect();
    let calibrated = recalibrate_sequence(&raw, 20);
    let first = calibrated[0].0;
    let raw_ks = u_plot(&raw[first..].iter().map(|(_, r)| r.clone()).collect::<Vec<_>>()).unwrap().ks_distance;
    let cal_ks = u_plot(&calibrated.into_iter().map(|(_, _, r)| r).collect::<Vec<_>>()).unwrap().ks_distance;
    (raw_ks, cal_ks)
}

fn go_vs_du(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = simulate::goel_okumoto_gaps(600.0, 2e-3, 500, &mut rng);
    let go = rolling_predictions(SrgmKind::Go, &gaps, 50).unwrap();
    let du = rolling_predictions(SrgmKind::Du, &gaps, 50).unwrap();
    let (a, b) = reliab_core::evaluation::align(&go.records(), &du.records());
    *plr(&a, &b).unwrap().last().unwrap()
}

fn criterion_7(r: &mut Report) {
    let below = (0..50).filter(|&s| {
        let (ks, band) = true_rate_ks(1000 + s);
        ks < band
    });
    let below = below.count();
    r.line(
        "7a (true-rate u-plot inside 5% band, >= 45/50)",
        below >= 45,
        format!("{below}/50 runs of 500 gaps below the band ({:.4})", kolmogorov_critical_value(500, 0.05)),
    );

    let improved = (0..50).filter(|&s| {
        let (raw, cal) = biased_ks(2000 + s);
        cal < raw
    });
    let improved = improved.count();
    r.line(
        "7b (recalibration lowers KS, >= 45/50)",
        improved >= 45,
        format!("{improved}/50 biased-exponential runs improved"),
    );

    let endpoints: Vec<f64> = (0..20).map(|s| go_vs_du(3000 + s)).collect();
    let positive = endpoints.iter().filter(|&&v| v > 0.0).count();
    r.line(
        "7c (log PLR GO:DU on GO data > 0, >= 16/20)",
        positive >= 16,
        format!("{positive}/20 positive endpoints, median {:.2}", median(&endpoints)),
    );

    let records = bundled_fixture();
    let mut finals = Vec::new();
    for seed in 0..10 {
        let history = expand_to_interfailure(&records, seed).unwrap();
        let analysis = analyze_history(&history, &SrgmKind::ALL, &AnalysisOptions::default()).unwrap();
        finals.push(analysis.consensus_recalibrated.unwrap_or(f64::NAN));
    }
    let inside = finals.iter().all(|v| (5000.0..=10000.0).contains(v));
    let lo = finals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    r.line(
        "7d (fixture consensus MMTD in [5000, 10000], 10 seeds)",
        inside,
        format!("recalibrated consensus range {lo:.0}..{hi:.0} miles, median {:.0}", median(&finals)),
    );
}

fn median(v: &[f64]) -> f64 {
    reliab_core::evaluation::consensus(v).unwrap_or(f64::NAN)
}

fn criterion_8(r: &mut Report) {
    let constraint_sets = [
        constraints(0.9),
        constraints(1e-6),
        PriorConstraints::new(1e-16, 0.5, 1e-18).unwrap(),
        PriorConstraints::new(1e-3, 0.999, 1e-12).unwrap(),
    ];
    let ns = [0.0, 1.0, 1e3, 1e6, 1e9, 1e12, 1e15];
    let ps = [1e-15, 1e-12, 1e-9, 1e-6, 1e-3, 0.1, 0.5, 0.999];
    let ks = [0u64, 1, 10, 100, 1000, 10_000];
    let mut evaluated = 0;
    let mut bad = Vec::new();
    for &n in &ns {
        for &k in ks.iter().filter(|&&k| k as f64 <= n) {
            let obs = Observation::new(k, n).unwrap();
            for &p in &ps {
                let mut values = Vec::new();
                for cs in &constraint_sets {
                    values.push(worst_case_posterior_confidence(cs, &obs, p));
                }
                values.push(beta_posterior_confidence(&BetaPrior::UNIFORM, &obs, p));
                values.push(beta_posterior_confidence(&BetaPrior::JEFFREYS, &obs, p));
                for v in values {
                    evaluated += 1;
                    match v {
                        Ok(x) if x.is_finite() && (0.0..=1.0).contains(&x) => {}
                        other => bad.push(format!("n={n:e} k={k} p={p:e}: {other:?}")),
                    }
                }
            }
        }
    }
    r.line(
        "8 (stability sweep)",
        bad.is_empty(),
        format!("{evaluated} evaluations, {} outside [0, 1] or failed{}", bad.len(), bad.first().map(|b| format!(", e.g. {b}")).unwrap_or_default()),
    );
}

fn main() -> ExitCode {
    let mut report = Report { failures: 0 };
    let criteria: [Criterion; 8] = [
        ("1", criterion_1),
        ("2", criterion_2),
        ("3", criterion_3),
        ("4", criterion_4),
        ("5", criterion_5),
        ("6", criterion_6),
        ("7", criterion_7),
        ("8", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    for (id, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == id) {
            continue;
        }
        let start = Instant::now();
        run(&mut report);
        println!("  ({id} took {:.1} s)", start.elapsed().as_secs_f64());
    }
    if report.failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
