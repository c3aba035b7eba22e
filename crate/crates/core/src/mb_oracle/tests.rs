use super::*;

fn box11() -> Pulse {
    Pulse::boxcar(1.0, 1.0).unwrap()
}

#[test]
fn zero_pulse_stays_trivial() {
    let g = simulate(&Pulse::zero(), 2.0, 2.0, 0.01).unwrap();
    assert!(g.data().iter().all(|f| *f == FieldTriple::trivial()));
    let r = check_invariants(&g, &Pulse::zero());
    assert_eq!(r.max_conservation_defect, 0.0);
    assert_eq!(r.max_causality_defect, 0.0);
    assert_eq!(r.boundary_error, 0.0);
}

#[test]
fn preconditions_are_enforced() {
    let p = box11();
    assert!(matches!(simulate(&p, 1.0, 1.0, 0.05), Err(OracleError::CflViolation(_))));
    assert!(matches!(simulate(&p, 300.0, 1.0, 0.02), Err(OracleError::CflViolation(_))));
    assert!(matches!(simulate(&p, 1.003, 1.0, 0.01), Err(OracleError::CflViolation(_))));
    assert!(matches!(simulate(&p, 100.0, 200.0, 0.02), Err(OracleError::TooLarge { .. })));
}

#[test]
fn causal_region_is_trivial_and_boundary_reproduced() {
    let p = box11();
    let g = simulate(&p, 6.0, 5.0, 0.01).unwrap();
    let r = check_invariants(&g, &p);
    assert!(r.max_causality_defect <= 1e-9);
    assert_eq!(r.boundary_error, 0.0);
    assert!(r.max_conservation_defect < 1e-6);
    for &(t, x) in &[(1.0, 1.0), (2.0, 3.5), (0.3, 4.0)] {
        assert_eq!(g.probe(t, x).unwrap(), FieldTriple::trivial());
    }
    // The report of a storage-free run is the same.
    assert_eq!(simulate_report(&p, 6.0, 5.0, 0.01).unwrap(), r);
}

#[test]
fn probe_reproduces_nodes_and_boundary() {
    let p = Pulse::smooth_bump(1.5, 2.0, 1.0).unwrap();
    let g = simulate(&p, 4.0, 3.0, 0.02).unwrap();
    for &(i, j) in &[(10usize, 3usize), (150, 40), (200, 150), (77, 0)] {
        let (t, x) = (i as f64 * 0.02, j as f64 * 0.02);
        let v = g.probe(t, x).unwrap();
        let n = g.node(i, j);
        assert!((v.e - n.e).norm() < 1e-12 && (v.n - n.n).abs() < 1e-12);
    }
    for &t in &[0.13, 0.411, 0.777] {
        let v = g.probe(t, 0.0).unwrap();
        assert!((v.e - p.eval(t)).norm() < 1e-5, "t = {t}");
    }
    assert!(matches!(g.probe(5.0, 1.0), Err(OracleError::OutOfDomain { .. })));
}

#[test]
fn binary_round_trip() {
    let p = box11();
    let g = simulate(&p, 1.0, 0.5, 0.01).unwrap();
    let mut buf = Vec::new();
    g.write_to(&mut buf).unwrap();
    assert_eq!(buf.len(), 32 + 40 * g.data().len());
    let back = SimGrid::read_from(buf.as_slice(), &p).unwrap();
    assert_eq!(back, g);
    buf.truncate(100);
    assert!(SimGrid::read_from(buf.as_slice(), &p).is_err());
}

#[test]
fn band_run_matches_full_run() {
    let p = Pulse::boxcar(2.0, 1.0).unwrap();
    let h = 0.01;
    let g = simulate(&p, 5.0, 2.0, h).unwrap();
    let (cols, report) = simulate_columns(&p, 3.0, 2.0, h, &[0.5, 2.0]).unwrap();
    assert!(report.max_causality_defect <= 1e-9);
    for &x in &[0.5, 2.0] {
        let (_, col) = cols.column(x).unwrap();
        let j = (x / h).round() as usize;
        for (k, f) in col.iter().enumerate() {
            assert_eq!(f, g.node(k + j, j));
        }
    }
    let a = cols.probe(1.234, 0.5).unwrap();
    let b = g.probe(1.734, 0.5).unwrap();
    assert!((a.e - b.e).norm() < 1e-12);
}

#[test]
fn bloch_norm_is_kept_to_rounding() {
    let r = simulate_report(&box11(), 10.0, 10.0, 0.01).unwrap();
    assert!(r.max_conservation_defect < 1e-12, "{r:?}");
}

/// Samples of `(Re E, N)` on columns `x = 2, 4, .., 10` every `0.04` in `s`.
fn coarse_samples(h: f64) -> Vec<(f64, f64)> {
    let keep: Vec<f64> = (1..=5).map(|i| 2.0 * i as f64).collect();
    let (cs, _) = simulate_columns(&box11(), 10.0, 10.0, h, &keep).unwrap();
    let stride = (0.04 / h).round() as usize;
    cs.xs()
        .into_iter()
        .flat_map(|x| cs.column(x).unwrap().1.iter().step_by(stride).map(|f| (f.e.re, f.n)).collect::<Vec<_>>())
        .collect()
}

#[test]
fn solution_converges_at_second_order() {
    let runs: Vec<_> = [0.02, 0.01, 0.005].iter().map(|&h| coarse_samples(h)).collect();
    let diff = |a: &[(f64, f64)], b: &[(f64, f64)]| {
        a.iter().zip(b).map(|(u, v)| (u.0 - v.0).abs().max((u.1 - v.1).abs())).fold(0.0, f64::max)
    };
    let ratio = diff(&runs[0], &runs[1]) / diff(&runs[1], &runs[2]);
    assert!(ratio > 3.5 && ratio < 4.5, "ratio = {ratio}");
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn causality_and_norm_hold_for_boxes(a in 0.1f64..4.0, t in 0.5f64..2.0) {
            let p = Pulse::boxcar(a, t).unwrap();
            let h = 0.01;
            let r = simulate_report(&p, 3.0, 3.0, h).unwrap();
            prop_assert_eq!(r.max_causality_defect, 0.0);
            prop_assert!(r.max_conservation_defect < 1e-12);
            prop_assert_eq!(r.boundary_error, 0.0);
        }
    }
}
