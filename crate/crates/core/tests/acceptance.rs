//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs as a plain binary (`harness = false`) so the lines always reach the
//! output; exits non-zero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use softcap_core::engine::{run_ensemble, run_ensemble_with_traces, EnsembleConfig, EnsembleSummary};
use softcap_core::models::{build_model, ModelError, ModelSpec, OffspringPiece};
use softcap_core::oracle::exact_absorption_bounded;
use softcap_core::process::TraceRecord;
use softcap_core::report::{to_csv_string, Verdict};
use softcap_core::verify::{
    binomial, check_assumptions, check_doob_above, check_excursion_geometry, check_hit_zero,
    check_return_time, scan_capacity, EpsilonK, ScanSettings,
};
use softcap_core::ChangeLaw;

const SIGMA: f64 = 3.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn parallelism() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// 1. Certain extinction and agreement with the first-step oracle.
fn extinction_certainty() -> Outcome {
    let model = build_model(&ModelSpec::ratio_birth_death(10)).unwrap();
    let cfg = EnsembleConfig::new(10, 5, 5000, 10_000_000, 0xA11CE).with_parallelism(parallelism());
    let s = run_ensemble(&model, &cfg).unwrap();
    let freq = s.extinction_frequency();
    let exact = exact_absorption_bounded(&model, 200, 5, 1e-12).unwrap();
    let oracle = exact.expected_absorption_time[5];
    let t = &s.extinction_time;
    let z = (t.mean() - oracle).abs() / t.stderr();
    outcome(
        freq >= 0.995 && z <= SIGMA,
        format!(
            "freq={freq} (>= 0.995), mean time {:.4} ± {:.4} vs oracle {oracle:.4} ({z:.2} se), tail mass {:e}",
            t.mean(),
            t.stderr(),
            exact.cap_hit_probability[5]
        ),
    )
}

/// 2. Positive survival when the death risk decays with visits.
fn counterexample_survival() -> Outcome {
    let model = build_model(&ModelSpec::counterexample()).unwrap();
    let cfg = EnsembleConfig::new(2, 1, 10_000, 100_000, 0xC0FFEE).with_parallelism(parallelism());
    let s = run_ensemble(&model, &cfg).unwrap();
    let survival = s.censored as f64 / s.reps as f64;
    let mut target = 1.0;
    for j in 3..=60 {
        target *= 1.0 - 0.5f64.powi(j);
    }
    outcome(
        (survival - target).abs() <= 0.02,
        format!("survival={survival} vs {target:.6} (±0.02)"),
    )
}

/// Symmetric walk, K = 20, started at K - 1. Shared by criteria 3-5.
fn symmetric_ensemble() -> EnsembleSummary {
    let model = build_model(&ModelSpec::symmetric_walk(20)).unwrap();
    let cfg =
        EnsembleConfig::new(20, 19, 10_200, 10_000_000, 0x5EED).with_parallelism(parallelism());
    run_ensemble(&model, &cfg).unwrap()
}

/// 3. The 1/K hit-zero bound is attained.
fn hit_zero_sharpness(s: &EnsembleSummary) -> Outcome {
    let model = build_model(&ModelSpec::symmetric_walk(20)).unwrap();
    let r = check_hit_zero(&model, s);
    let z = (r.empirical - 0.05).abs() / r.stderr;
    outcome(
        r.n >= 100_000 && z <= SIGMA && r.verdict == Verdict::Holds,
        format!(
            "P(extinct | excursion from K-1) = {:.5} ± {:.5} over {} excursions ({z:.2} se from 1/20)",
            r.empirical, r.stderr, r.n
        ),
    )
}

/// 4. Mean number of below-K excursions before extinction is K.
fn mean_excursions(s: &EnsembleSummary) -> Outcome {
    let per = &s.below.per_extinct_trace;
    let (mean, se) = (per.mean(), per.stderr());
    let within = (mean - 20.0).abs() <= SIGMA * se;
    let at_least = mean >= 20.0 - SIGMA * se;
    outcome(
        per.count >= 10_000 && within && at_least,
        format!(
            "mean below-K excursions {mean:.4} ± {se:.4} over {} extinct reps ({} censored)",
            per.count, s.censored
        ),
    )
}

/// 5. Maximal inequality above K and the gambler's-ruin value.
fn doob_above(s: &EnsembleSummary) -> Outcome {
    let xs = [25u64, 40, 100];
    let reports = check_doob_above(s, &xs);
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        let r = &reports[2 * i];
        let bound = 20.0 / x as f64;
        let ruin = 1.0 / (x - 20 + 1) as f64;
        let z = (r.empirical - ruin).abs() / r.stderr;
        let ok = r.empirical <= bound && z <= SIGMA && r.verdict == Verdict::Holds;
        pass &= ok;
        parts.push(format!(
            "x={x}: {:.5} ± {:.5} (K/x={bound:.3}, ruin={ruin:.5}, {z:.2} se)",
            r.empirical, r.stderr
        ));
    }
    outcome(pass, parts.join("; "))
}

/// 6. Geometric decay of the number of returns above K.
fn geometric_decay() -> Outcome {
    let model = build_model(&ModelSpec::ratio_birth_death(5)).unwrap();
    let cfg = EnsembleConfig::new(5, 3, 10_000, 1_000_000, 0x6E0).with_parallelism(parallelism());
    let s = run_ensemble(&model, &cfg).unwrap();
    let eps_k = EpsilonK::new(1.0 / 6.0, 5).unwrap();
    let p = 1.0 - (1.0f64 / 6.0).powi(4);
    let reports = check_excursion_geometry(&model, &s, &eps_k, 5);
    let mut pass = (eps_k.p() - p).abs() < 1e-15;
    let mut parts = Vec::new();
    for (k, r) in (1..=5).zip(&reports) {
        let bound = p.powi(k);
        pass &= r.empirical <= bound && (r.theoretical - bound).abs() < 1e-15;
        parts.push(format!("k={k}: {:.4} <= {bound:.5}", r.empirical));
    }
    outcome(pass, parts.join("; "))
}

/// 7. Mean above-K excursion duration under drift -delta.
fn return_time() -> Outcome {
    let model = build_model(&ModelSpec::biased_walk(10, 0.2)).unwrap();
    let cfg = EnsembleConfig::new(10, 9, 2_000, 10_000_000, 0x7E7).with_parallelism(parallelism());
    let s = run_ensemble(&model, &cfg).unwrap();
    let reports = check_return_time(&model, &s, 0.2, 1);
    let d = &s.above.durations;
    let (mean, se) = (d.mean(), d.stderr());
    outcome(
        mean <= 5.0 + SIGMA * se && reports.iter().all(|r| r.verdict == Verdict::Holds),
        format!("mean duration {mean:.4} ± {se:.4} over {} excursions (<= 5 + 3se)", d.count),
    )
}

/// 8. Exponential growth of the extinction time in K.
fn exponential_scaling() -> Outcome {
    let settings = ScanSettings {
        reps: 40_000,
        budget: 10_000_000,
        seed: 0x8CA1E,
        parallelism: parallelism(),
        oracle_margin: Some(100),
        tail_tolerance: 1e-12,
    };
    let table = scan_capacity(&ModelSpec::biased_walk(4, 0.2), &[4, 6, 8, 10, 12], &settings).unwrap();
    let fit = table.fit.unwrap();
    let mut pass = table.strictly_increasing && fit.log_slope > 0.0;
    let mut parts = Vec::new();
    for r in &table.rows {
        let exact = r.oracle_mean.unwrap_or(f64::NAN);
        let z = (r.mean_time - exact).abs() / r.stderr;
        pass &= z <= SIGMA;
        parts.push(format!(
            "K={}: {:.2} ± {:.2} vs {exact:.2} ({z:.2} se)",
            r.capacity, r.mean_time, r.stderr
        ));
    }
    parts.push(format!("log-slope {:.4} ({:?})", fit.log_slope, fit.growth));
    outcome(pass, parts.join("; "))
}

/// 9. Bit-identical summaries and output files across thread counts.
fn reproducibility() -> Outcome {
    let model = build_model(&ModelSpec::biased_walk(6, 0.25)).unwrap();
    let render = |p: usize| -> (String, String, String) {
        let mut cfg = EnsembleConfig::new(6, 5, 3_000, 1_000_000, 0x9999).with_parallelism(p);
        let s = run_ensemble(&model, &cfg).unwrap();
        cfg.record_full_traces = true;
        let (s2, traces) = run_ensemble_with_traces(&model, &cfg).unwrap();
        assert_eq!(s, s2);
        let mut lines = String::new();
        for t in &traces {
            lines.push_str(&serde_json::to_string(&TraceRecord::from_trace(t, true)).unwrap());
            lines.push('\n');
        }
        let mut reports = check_doob_above(&s, &[8, 12]);
        reports.push(check_hit_zero(&model, &s));
        (serde_json::to_string_pretty(&s).unwrap(), to_csv_string(&reports), lines)
    };
    let base = render(1);
    let same = [4, 8].iter().all(|&p| render(p) == base);
    outcome(
        same,
        format!(
            "summary {} bytes, reports {} bytes, traces {} bytes identical at parallelism 1/4/8",
            base.0.len(),
            base.1.len(),
            base.2.len()
        ),
    )
}

/// 10. The assumption checker separates the counterexample from the catalog.
fn assumption_checker() -> Outcome {
    let catalog = vec![
        ModelSpec::ratio_birth_death(10),
        ModelSpec::biased_walk(10, 0.2),
        ModelSpec::symmetric_walk(20),
        ModelSpec::cell_cycle(5, vec![(1, 0.3), (5, 0.6)]),
        ModelSpec::moran_toy(
            4,
            vec![
                OffspringPiece {
                    min_size: 1,
                    pmf: vec![(0, 0.3), (2, 0.5), (3, 0.2)],
                },
                OffspringPiece {
                    min_size: 4,
                    pmf: vec![(0, 0.6), (2, 0.3), (3, 0.1)],
                },
            ],
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for spec in &catalog {
        let m = build_model(spec).unwrap();
        let reports = check_assumptions(&m, m.z_max(), 50).unwrap();
        let ok = reports.iter().all(|r| r.verdict == Verdict::Holds);
        pass &= ok;
        parts.push(format!("{}: {}", spec.kind(), if ok { "holds" } else { "FLAGGED" }));
    }
    let c = build_model(&ModelSpec::counterexample()).unwrap();
    let r = check_assumptions(&c, 8, 50).unwrap();
    let flagged = r[0].verdict == Verdict::Holds && r[1].verdict == Verdict::Violated;
    pass &= flagged;
    parts.push(format!("counterexample death floor: {:?}", r[1].verdict));
    let bad = ModelSpec::moran_toy(
        5,
        vec![OffspringPiece {
            min_size: 1,
            pmf: vec![(0, 0.4), (2, 0.6)],
        }],
    );
    let rejected = matches!(build_model(&bad), Err(ModelError::PositiveDrift { .. }));
    pass &= rejected;
    parts.push(format!("positive-drift moran rejected: {rejected}"));
    outcome(pass, parts.join("; "))
}

fn main() -> ExitCode {
    // libtest arguments such as --nocapture are accepted and ignored
    let started = Instant::now();
    let mut failures = 0;
    let mut report = |id: u32, name: &str, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!(
            "[{}] AC{id} {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        if !o.pass {
            failures += 1;
        }
    };
    report(1, "extinction certainty", &extinction_certainty);
    report(2, "counterexample survival", &counterexample_survival);
    let sym = symmetric_ensemble();
    report(3, "hit-zero sharpness", &|| hit_zero_sharpness(&sym));
    report(4, "mean below-K excursions", &|| mean_excursions(&sym));
    report(5, "maximal inequality above K", &|| doob_above(&sym));
    report(6, "geometric decay", &geometric_decay);
    report(7, "return-time bound", &return_time);
    report(8, "exponential scaling", &exponential_scaling);
    report(9, "reproducibility", &reproducibility);
    report(10, "assumption checker", &assumption_checker);
    let (freq, _) = binomial(sym.n_extinct, sym.reps);
    println!(
        "acceptance: {} of 10 criteria passed in {:.1}s (symmetric ensemble extinct fraction {freq:.4})",
        10 - failures,
        started.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
