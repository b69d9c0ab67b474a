use softcap_core::models::OffspringPiece;
use softcap_core::report::Verdict;
use softcap_core::verify::check_doob_above;
use softcap_core::*;

fn moran_spec(k: u64) -> ModelSpec {
    ModelSpec::moran_toy(
        k,
        vec![
            OffspringPiece { min_size: 1, pmf: vec![(0, 0.3), (2, 0.5), (3, 0.2)] },
            OffspringPiece { min_size: k, pmf: vec![(0, 0.7), (2, 0.2), (3, 0.1)] },
        ],
    )
}

/// Ensemble mean extinction time against the truncated-chain solution.
#[test]
fn ensemble_agrees_with_first_step_oracle() {
    let cases = [
        (ModelSpec::cell_cycle(6, vec![(1, 0.35), (6, 0.65)]), 5u64, 0xC311u64),
        (moran_spec(5), 4, 0x3042),
        (ModelSpec::biased_walk(5, 0.3), 2, 0xB1A5),
        (ModelSpec::ratio_birth_death(4), 6, 0x4A71),
        (ModelSpec::ratio_birth_death(5), 3, 0x5EED5),
    ];
    for (spec, z0, seed) in cases {
        let model = build_model(&spec).unwrap();
        let k = model.capacity();
        let exact = exact_absorption_bounded(&model, k + 150, z0, 1e-12).unwrap();
        let cfg = EnsembleConfig::new(k, z0, 10_000, 10_000_000, seed);
        let s = run_ensemble(&model, &cfg).unwrap();
        assert_eq!(s.n_extinct, 10_000, "{}", spec.kind());
        let t = &s.extinction_time;
        let oracle = exact.expected_absorption_time[z0 as usize];
        assert!(
            (t.mean() - oracle).abs() <= 3.0 * t.stderr(),
            "{}: {} ± {} vs {oracle}",
            spec.kind(),
            t.mean(),
            t.stderr()
        );
    }
}

/// P(max of an above-K excursion >= x) <= Z_mu / x on every cataloged law.
#[test]
fn start_anchored_maximal_inequality_holds() {
    let cases = [
        (ModelSpec::ratio_birth_death(8), 7u64),
        (ModelSpec::biased_walk(8, 0.1), 7),
        (ModelSpec::symmetric_walk(8), 7),
        (ModelSpec::cell_cycle(8, vec![(1, 0.4), (8, 0.5)]), 7),
        (moran_spec(8), 7),
    ];
    for (spec, z0) in cases {
        let model = build_model(&spec).unwrap();
        let cfg = EnsembleConfig::new(8, z0, 2_000, 200_000, 0xD00B);
        let s = run_ensemble(&model, &cfg).unwrap();
        let reports = check_doob_above(&s, &[8, 10, 12, 16, 24]);
        for r in reports.iter().filter(|r| r.name.starts_with("doob_start_anchored")) {
            assert_eq!(r.verdict, Verdict::Holds, "{}: {r:?}", spec.kind());
            assert!(r.n > 0);
        }
    }
}
