use nalgebra::{DMatrix, DVector};

use softcap_core::models::OffspringPiece;
use softcap_core::oracle::{solve_chain, AbsorbingChain};
use softcap_core::*;

/// Dense reference: solve (I - Q) x = b for the absorption time and for the
/// probabilities of hitting 0 and the cap.
fn dense(chain: &AbsorbingChain) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = chain.cap() as usize;
    let mut a = DMatrix::<f64>::identity(n, n);
    let mut to_zero = DVector::<f64>::zeros(n);
    for z in 1..=n {
        for &(t, p) in chain.row(z as u64) {
            if t == 0 {
                to_zero[z - 1] += p;
            } else {
                a[(z - 1, t as usize - 1)] -= p;
            }
        }
    }
    let lu = a.lu();
    let time = lu.solve(&DVector::from_element(n, 1.0)).unwrap();
    let ext = lu.solve(&to_zero).unwrap();
    // Hitting the cap before 0: make the cap absorbing.
    let mut b = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    for z in 1..n {
        for &(t, p) in chain.row(z as u64) {
            if t != 0 {
                b[(z - 1, t as usize - 1)] -= p;
            }
        }
    }
    let hit = b.lu().solve(&rhs).unwrap();
    let pad = |v: DVector<f64>, at0: f64| std::iter::once(at0).chain(v.iter().copied()).collect();
    (pad(time, 0.0), pad(ext, 1.0), pad(hit, 0.0))
}

fn assert_close(a: &[f64], b: &[f64], rel: f64, what: &str) {
    assert_eq!(a.len(), b.len());
    for (z, (x, y)) in a.iter().zip(b).enumerate() {
        assert!((x - y).abs() <= rel * y.abs().max(1.0), "{what}[{z}]: {x} vs {y}");
    }
}

fn moran_spec(k: u64) -> ModelSpec {
    ModelSpec::moran_toy(
        k,
        vec![
            OffspringPiece { min_size: 1, pmf: vec![(0, 0.3), (2, 0.5), (3, 0.2)] },
            OffspringPiece { min_size: k, pmf: vec![(0, 0.6), (2, 0.3), (3, 0.1)] },
        ],
    )
}

#[test]
fn banded_solver_matches_dense_lu() {
    let specs = [
        (ModelSpec::ratio_birth_death(10), 120),
        (ModelSpec::biased_walk(8, 0.2), 60),
        (ModelSpec::symmetric_walk(6), 12),
        (ModelSpec::cell_cycle(5, vec![(1, 0.3), (5, 0.7)]), 40),
        (moran_spec(6), 50),
        (moran_spec(3), 9),
    ];
    for (spec, cap) in specs {
        let model = build_model(&spec).unwrap();
        let chain = AbsorbingChain::from_law(&model, cap).unwrap();
        let sol = solve_chain(&chain).unwrap();
        let (time, ext, hit) = dense(&chain);
        let kind = spec.kind();
        assert_close(&sol.expected_absorption_time, &time, 1e-9, kind);
        assert_close(&sol.extinction_probability, &ext, 1e-9, kind);
        assert_close(&sol.cap_hit_probability, &hit, 1e-9, kind);
    }
}

#[test]
fn constant_walk_matches_closed_forms() {
    // A ±1 walk with up-probability p, forced down at the cap N.
    for (p, n) in [(0.5, 10u64), (0.4, 25), (0.6, 15), (0.3, 40)] {
        let rows = (1..=n)
            .map(|z| if z == n { vec![(n - 1, 1.0)] } else { vec![(z - 1, 1.0 - p), (z + 1, p)] })
            .collect();
        let sol = solve_chain(&AbsorbingChain::new(rows).unwrap()).unwrap();
        let q = 1.0 - p;
        for i in 0..=n {
            let ruin_up = if (p - 0.5).abs() < 1e-15 {
                i as f64 / n as f64
            } else {
                let r = q / p;
                (1.0 - r.powi(i as i32)) / (1.0 - r.powi(n as i32))
            };
            let h = sol.cap_hit_probability[i as usize];
            assert!((h - ruin_up).abs() < 1e-10, "p={p} i={i}: {h} vs {ruin_up}");
            assert!((sol.extinction_probability[i as usize] - 1.0).abs() < 1e-10);
        }
        if (p - 0.5).abs() < 1e-15 {
            // Reflected at N: E_i = i (2N - i) - ... summed per step; check E_1 = 2N - 1.
            let e1 = sol.expected_absorption_time[1];
            assert!((e1 - (2 * n - 1) as f64).abs() < 1e-8, "{e1}");
        }
    }
}

#[test]
fn oracle_refuses_history_dependent_and_huge_chains() {
    let cx = build_model(&ModelSpec::counterexample()).unwrap();
    assert!(exact_absorption(&cx, 10).is_err());
    let walk = build_model(&ModelSpec::symmetric_walk(5)).unwrap();
    assert!(exact_absorption(&walk, 10_001).is_err());
    assert!(exact_absorption(&walk, 10_000).is_ok());
}
