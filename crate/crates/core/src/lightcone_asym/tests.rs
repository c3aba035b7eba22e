use proptest::prelude::*;

use super::*;
use crate::pulse::Pulse;

fn bump() -> ScatteringData {
    ScatteringData::with_defaults(Pulse::smooth_bump(1.0, 2.0, 1.0).unwrap())
}

fn p2() -> BandParams {
    BandParams::for_order(2.0)
}

#[test]
fn classify_examples() {
    assert_eq!(classify(3.0, 4.0, 2.0, &p2()).region, Region::Causal);
    assert_eq!(classify(4.0, 4.0, 2.0, &p2()).region, Region::Causal);
    assert_eq!(classify(100.005, 100.0, 2.0, &p2()).region, Region::PartI);

    let x = 10f64.exp();
    let (l, ll) = (x.ln(), x.ln().ln());
    let tau = (2.0 * l - ll).powi(2) / (4.0 * x) * (1.0 + 1e-6);
    let tag = classify_offset(tau, x, 2.0, &p2());
    assert_eq!(classify(x + tau, x, 2.0, &p2()).region, Region::PartIV(1));
    assert_eq!(tag.region, Region::PartIV(1));
    assert!(tag.band.0 <= tag.xi && tag.xi <= tag.band.1);

    // Deep inside the cone, far from both the near-cone bands and the tail.
    assert_eq!(classify(2.0 * x, x, 2.0, &p2()).region, Region::Tail);
    assert_eq!(classify(x + 20.0, x, 2.0, &p2()).region, Region::Unsupported);
    assert_eq!(classify(100.0 * x, x, 2.0, &p2()).region, Region::Unsupported);
}

#[test]
fn higher_part_wins_on_shared_edges() {
    let x = 30f64.exp();
    let params = p2();
    let (lo3, _) = part_iii_band(x, 2.0, &params).unwrap();
    let (_, hi2) = part_ii_band(x, 2.0, &params).unwrap();
    assert!((lo3 - hi2).abs() < 1e-12);
    let (lo1, _) = part_iv_band(x, 2.0, 1).unwrap();
    let tag = classify_offset(lo1 * lo1 / (4.0 * x), x, 2.0, &params);
    assert!(matches!(tag.region, Region::PartIV(n) if n >= 1), "{:?}", tag.region);
}

#[test]
fn band_parameters_are_validated() {
    assert!(p2().validate(2.0).is_ok());
    let mut p = p2();
    p.eps2 = 0.6;
    assert!(p.validate(2.0).is_err());
    let mut p = p2();
    p.k_big = 2.1;
    assert!(p.validate(2.0).is_err());
}

#[test]
fn zero_reflection_gives_trivial_state() {
    let pt = LightconePoint::new(20.01, 20.0, 2.0).unwrap();
    let v = formula(Region::PartI, &pt, C64::new(0.0, 0.0)).unwrap();
    assert_eq!(v.field, FieldTriple::trivial());
}

#[test]
fn part_i_field_vanishes_on_the_cone() {
    // r(i k0) decaying like k0^-2.
    let mut prev = f64::INFINITY;
    for &d in &[1e-2, 1e-4, 1e-6, 1e-8] {
        let pt = LightconePoint::from_offset(d, 10.0, 2.0).unwrap();
        let r = C64::new(0.3, -0.2) / (pt.k0 * pt.k0);
        let e = formula(Region::PartI, &pt, r).unwrap().field.e.norm();
        assert!(e < prev);
        prev = e;
    }
    assert!(prev < 1e-6);
}

#[test]
fn part_iv_peak_and_bloch_identity() {
    let pt = LightconePoint::from_offset(0.3, 1e4, 2.0).unwrap();
    for n in 0..4 {
        // |r| making Theta_n vanish at this point.
        let r_abs = (-(pt.theta(n, 1.0))).exp();
        let r = C64::from_polar(r_abs, 0.7);
        let v = formula(Region::PartIV(n), &pt, r).unwrap();
        assert!(v.theta.abs() < 1e-10);
        assert!((v.field.n + 1.0).abs() < 1e-12);
        assert!(v.field.rho.norm() < 1e-12);
        assert!((v.field.e.norm() - 2.0 * (pt.x / pt.tau).sqrt()).abs() < 1e-9 * v.field.e.norm());
        for s in [1e-3, 0.1, 1.0, 10.0, 1e3] {
            let v = formula(Region::PartIV(n), &pt, r * s).unwrap();
            assert!(v.field.bloch_defect().abs() < 1e-12);
        }
    }
}

#[test]
fn eval_checks_the_region() {
    let sd = bump();
    let params = p2();
    let tag = classify(100.005, 100.0, 2.0, &params);
    assert!(eval_lightcone(&tag, 100.005, 100.0, &sd, &params).is_ok());
    let mut wrong = tag;
    wrong.region = Region::PartIII;
    assert!(matches!(
        eval_lightcone(&wrong, 100.005, 100.0, &sd, &params),
        Err(LightconeError::WrongRegion { .. })
    ));
}

#[test]
fn parts_ii_and_iii_agree_on_their_edge() {
    let sd = bump();
    let params = p2();
    for lx in [8.0, 12.0, 20.0, 30.0] {
        let x = f64::exp(lx);
        let (lo, _) = part_iii_band(x, 2.0, &params).unwrap();
        let tau = lo * lo / (4.0 * x);
        let a = eval_formula(Region::PartII, tau, x, 2.0, &sd).unwrap();
        let b = eval_formula(Region::PartIII, tau, x, 2.0, &sd).unwrap();
        let scale = a.error.e_abs.max(b.error.e_abs);
        assert!((a.field.e - b.field.e).norm() <= 3.0 * scale, "x = e^{lx}");
    }
}

#[test]
fn part_iii_matches_part_iv_zero() {
    let sd = bump();
    let params = p2();
    let x = 20f64.exp();
    let (lo4, _) = part_iv_band(x, 2.0, 0).unwrap();
    let (_, hi3) = part_iii_band(x, 2.0, &params).unwrap();
    assert!(lo4 < hi3);
    let bound = 5.0 / x.ln().sqrt();
    for i in 0..=4 {
        let xi = lo4 + (hi3 - lo4) * i as f64 / 4.0;
        let tau = xi * xi / (4.0 * x);
        let a = eval_formula(Region::PartIII, tau, x, 2.0, &sd).unwrap();
        let b = eval_formula(Region::PartIV(0), tau, x, 2.0, &sd).unwrap();
        let k0 = x / xi;
        assert!((a.field.e - b.field.e).norm() / (4.0 * k0) <= bound);
        assert!((a.field.n - b.field.n).abs() <= bound);
        assert!((a.field.rho - b.field.rho).norm() <= bound);
    }
}

#[test]
fn peaks_solve_the_phase_equation_and_are_ordered() {
    let sd = bump();
    let fit = *sd.fit_tail().unwrap();
    let x = 20f64.exp();
    let mut prev = 0.0;
    for n in 0..4 {
        let peak = predict_peaks(x, n, &sd, 2.0).unwrap();
        let pt = LightconePoint::from_offset(peak.tau, x, 2.0).unwrap();
        let r = sd.reflection_imag_axis(pt.k0).unwrap();
        assert!(pt.theta(n, r.norm()).abs() < 1e-10);
        assert!(peak.tau > prev);
        prev = peak.tau;

        let seed = peak_seed(x, n, fit.m, fit.c.norm());
        let z = 0.5 * (fit.m * x.ln() - fit.m * 2f64.ln() - LightconePoint::chi(n, fit.c.norm()));
        let gamma = 0.5 * (n as f64 + 0.5 - fit.m);
        let lz = z.ln();
        let next_term = gamma.abs().powi(3) * (lz * lz + 2.0 * lz) / (2.0 * z * z) + lz.powi(3) / z.powi(3);
        assert!((seed - pt.y()).abs() <= 10.0 * next_term, "n = {n}: {} vs {}", seed, pt.y());
    }
    assert!(matches!(predict_peaks(2.0, 0, &sd, 2.0), Err(LightconeError::NoRoot { .. })));
}

#[test]
fn peaks_with_direct_reflection() {
    let sd = bump();
    let x = 6f64.exp();
    let peak = predict_peaks(x, 0, &sd, 2.0).unwrap();
    let pt = LightconePoint::from_offset(peak.tau, x, 2.0).unwrap();
    let r = sd.reflection_imag_axis(pt.k0).unwrap();
    assert!(pt.theta(0, r.norm()).abs() < 1e-8);
}

fn rank(r: Region) -> Option<u32> {
    match r {
        Region::Causal => Some(0),
        Region::PartI => Some(1),
        Region::PartII => Some(2),
        Region::PartIII => Some(3),
        Region::PartIV(n) => Some(4 + n),
        _ => None,
    }
}

proptest! {
    #[test]
    fn causal_iff_below_cone(t in 0.01f64..1e6, x in 0.01f64..1e6) {
        let tag = classify(t, x, 2.0, &p2());
        prop_assert_eq!(tag.region == Region::Causal, t <= x);
    }

    #[test]
    fn near_cone_regions_are_ordered_in_t(lx in 1.5f64..40.0, m in 1.0f64..4.0) {
        let x = lx.exp();
        let params = BandParams::for_order(m);
        let mut last = 0;
        let mut left_cone = false;
        for i in 0..400 {
            let xi = 0.01 + 0.3 * i as f64;
            let tag = classify_offset(xi * xi / (4.0 * x), x, m, &params);
            match rank(tag.region) {
                Some(r) => {
                    prop_assert!(!left_cone && r >= last, "{:?} after rank {}", tag.region, last);
                    last = r;
                    if let Region::PartIV(_) = tag.region {
                        prop_assert!(tag.band.0 <= xi && xi <= tag.band.1);
                    }
                }
                None => left_cone = true,
            }
        }
    }
}
