use super::*;

fn box_closed_form(amp: f64, t_end: f64, k: C64) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let w = (k * k + amp * amp / 4.0).sqrt();
    let ph = (i * k * t_end).exp();
    let a = ph * ((w * t_end).cos() - i * k / w * (w * t_end).sin());
    let b = amp / (2.0 * w) * (w * t_end).sin() * ph;
    (a, b)
}

fn box52() -> ScatteringData {
    ScatteringData::with_defaults(Pulse::boxcar(5.0, 2.0).unwrap())
}

#[test]
fn zero_pulse_is_free() {
    let sd = ScatteringData::with_defaults(Pulse::zero());
    let m = sd.jost_matrix(C64::new(0.7, 0.3)).unwrap();
    assert_eq!(m[0][0], C64::new(1.0, 0.0));
    assert_eq!(m[0][1], C64::new(0.0, 0.0));
    assert_eq!(sd.reflection(C64::new(-2.0, 1.0)).unwrap(), C64::new(0.0, 0.0));
    assert_eq!(sd.b_deriv(C64::new(0.0, 1.0)).unwrap(), C64::new(0.0, 0.0));
}

#[test]
fn box_at_origin() {
    let (a, b) = box52().ab_coeffs(C64::new(0.0, 0.0)).unwrap();
    assert!((a - C64::new(5f64.cos(), 0.0)).norm() < 1e-9);
    assert!((b - C64::new(5f64.sin(), 0.0)).norm() < 1e-9);
}

#[test]
fn box_matches_closed_form_off_axis() {
    let sd = box52();
    for &k in &[C64::new(0.3, 0.5), C64::new(-4.0, 0.2), C64::new(1.0, 3.0), C64::new(0.0, 10.0)] {
        let (a, b) = sd.ab_coeffs(k).unwrap();
        let (ae, be) = box_closed_form(5.0, 2.0, k);
        assert!((a - ae).norm() < 1e-8 && (b - be).norm() < 1e-8, "k = {k}");
    }
}

#[test]
fn jost_structure_and_determinant() {
    let sd = box52();
    for &k in &[-3.0, -0.4, 0.0, 1.1, 6.0] {
        let m = sd.jost_matrix(C64::new(k, 0.0)).unwrap();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((det - 1.0).norm() < 1e-9);
        assert!((m[0][0] - m[1][1].conj()).norm() < 1e-9);
        assert!((m[1][0] + m[0][1].conj()).norm() < 1e-9);
    }
    let m = sd.jost_matrix(C64::new(0.5, 1.5)).unwrap();
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    assert!((det - 1.0).norm() < 1e-9 * m[0][0].norm().max(1.0));
}

#[test]
fn real_pulse_symmetry() {
    let sd = ScatteringData::with_defaults(Pulse::smooth_bump(1.5, 2.0, 1.0).unwrap());
    for &k in &[0.2, 1.7, 9.0] {
        let rp = sd.reflection(C64::new(k, 0.0)).unwrap();
        let rm = sd.reflection(C64::new(-k, 0.0)).unwrap();
        assert!((rm - rp.conj()).norm() < 1e-8);
    }
}

#[test]
fn box_zero_of_b() {
    let sd = box52();
    let kz = C64::new(0.0, (6.25 - std::f64::consts::PI.powi(2) / 4.0).sqrt());
    let (_, b) = sd.ab_coeffs(kz).unwrap();
    assert!(b.norm() < 1e-9);
    let (_, b) = sd.ab_coeffs(C64::new(0.0, 1.944888)).unwrap();
    assert!(b.norm() < 1e-6);
}

#[test]
fn derivative_matches_closed_form_and_differences() {
    let sd = box52();
    let kz = C64::new(0.0, 1.944888);
    let h = 1e-6;
    let fd_exact = (box_closed_form(5.0, 2.0, kz + h).1 - box_closed_form(5.0, 2.0, kz - h).1) / (2.0 * h);
    let db = sd.b_deriv(kz).unwrap();
    assert!((db - fd_exact).norm() < 1e-7 * fd_exact.norm());

    let sd = ScatteringData::with_defaults(Pulse::smooth_bump(2.0, 2.0, 1.5).unwrap());
    let k = C64::new(0.3, 0.5);
    let h = 1e-5;
    let bp = sd.ab_coeffs(k + h).unwrap().1;
    let bm = sd.ab_coeffs(k - h).unwrap().1;
    let fd = (bp - bm) / (2.0 * h);
    let db = sd.b_deriv(k).unwrap();
    assert!((db - fd).norm() < 1e-6 * db.norm());
}

#[test]
fn growth_guard() {
    let sd = box52();
    assert!(matches!(sd.jost_matrix(C64::new(0.0, 200.0)), Err(ScatteringError::Overflow { .. })));
    // Column 2 alone never forms the growing exponential.
    let k = C64::new(0.0, 200.0);
    let (a, b) = sd.ab_coeffs(k).unwrap();
    let (ae, be) = box_closed_form(5.0, 2.0, k);
    assert!((a - ae).norm() < 1e-9 && (b - be).norm() < 1e-9 * be.norm());
    assert!(matches!(sd.ab_coeffs(C64::new(0.0, -1.0)), Err(ScatteringError::LowerHalfPlane(_))));
}

#[test]
fn a_tends_to_one() {
    let sd = ScatteringData::with_defaults(Pulse::power_start(1.0, 2.0, 1.0).unwrap());
    let mut prev = f64::INFINITY;
    for &kp in &[5.0, 20.0, 80.0, 300.0] {
        let (a, _) = sd.ab_coeffs(C64::new(0.0, kp)).unwrap();
        let d = (a - 1.0).norm();
        assert!(d < prev);
        prev = d;
    }
    assert!(prev < 1e-3);
}

#[test]
fn tail_fit_recovers_start_exponent() {
    let sd = ScatteringData::with_defaults(Pulse::power_start(1.0, 2.0, 1.0).unwrap());
    let fit = *sd.fit_tail().unwrap();
    assert!((1.9..=2.1).contains(&fit.m), "m = {}", fit.m);
    // Linearized scattering predicts C = -c1 / 8 for m = 2.
    assert!((fit.c - C64::new(-0.125, 0.0)).norm() < 0.01);

    let fine = ScatteringData::new(
        Pulse::power_start(1.0, 2.0, 1.0).unwrap(),
        ScatteringOptions {
            tol: Tolerances::default().scaled(0.01),
            ..Default::default()
        },
    );
    assert!((fine.fit_tail().unwrap().m - fit.m).abs() < 1e-6);
}

#[test]
fn tail_constant_is_linear_in_amplitude() {
    let small = ScatteringData::with_defaults(Pulse::smooth_bump(0.05, 2.0, 1.0).unwrap());
    let double = ScatteringData::with_defaults(Pulse::smooth_bump(0.1, 2.0, 1.0).unwrap());
    let ratio = double.fit_tail().unwrap().c.norm() / small.fit_tail().unwrap().c.norm();
    assert!((ratio - 2.0).abs() < 0.02, "ratio = {ratio}");
}

#[test]
fn reflection_times_power_is_bounded() {
    let sd = ScatteringData::with_defaults(Pulse::smooth_bump(1.0, 2.0, 1.0).unwrap());
    let vals: Vec<f64> = (0..=10)
        .map(|i| {
            let kp = 10.0 * 10f64.powf(i as f64 / 10.0);
            sd.reflection(C64::new(0.0, kp)).unwrap().norm() * kp * kp
        })
        .collect();
    let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(lo > 0.05 && hi < 0.5, "{lo} {hi}");
}

#[test]
fn table_interpolates_and_finds_real_zeros() {
    let sd = box52();
    let cache = sd.real_line_cache().unwrap();
    for &s in &[-7.33, -1.0, 0.013, 2.5, 7.9] {
        let (a, b) = cache.ab(s).unwrap();
        let (ae, be) = box_closed_form(5.0, 2.0, C64::new(s, 0.0));
        assert!((a - ae).norm() < 1e-8 && (b - be).norm() < 1e-8);
    }
    // sin(omega T) = 0 with omega = n pi / T real: k = +-sqrt(n^2 pi^2 / 4 - 6.25), n >= 2.
    let expected: Vec<f64> = (2..=5)
        .map(|n| ((n * n) as f64 * std::f64::consts::PI.powi(2) / 4.0 - 6.25).sqrt())
        .filter(|k| *k <= 8.0)
        .collect();
    let zeros = sd.real_zeros_of_b().unwrap();
    assert_eq!(zeros.len(), 2 * expected.len(), "{zeros:?}");
    for k in expected {
        assert!(zeros.iter().any(|z| (z - k).abs() < 1e-8));
        assert!(zeros.iter().any(|z| (z + k).abs() < 1e-8));
    }
}
