//! Modified Bessel functions of the first kind and the gamma function on the
//! imaginary axis.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("I_nu(x) overflows for x = {0}")]
    Overflow(f64),
    #[error("argument {name} = {value} outside [{min}, {max}]")]
    DomainError {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
}

fn check(name: &'static str, value: f64, min: f64, max: f64) -> Result<(), SpecfunError> {
    if value >= min && value <= max {
        Ok(())
    } else {
        Err(SpecfunError::DomainError { name, value, min, max })
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal-sheet `ln Gamma(z)` for `Re z >= 1/2` (Lanczos, g = 7).
///
/// Along `z = 1 + iy` the imaginary part is the continuous branch.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `ln Gamma(x)` for real `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the Lanczos sum in its accurate half-plane.
        return (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    ln_gamma_complex(Complex64::new(x, 0.0)).re
}

/// Gamma(iy) in polar form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaValue {
    pub modulus: f64,
    /// Principal value in (-pi, pi].
    pub argument: f64,
    /// Continuous in y, tending to -pi/2 as y -> 0+.
    pub phase: f64,
}

/// Gamma(iy) for `1e-8 <= y <= 50`, from Gamma(1 + iy) / (iy).
pub fn gamma_imag(y: f64) -> Result<GammaValue, SpecfunError> {
    check("y", y, 1e-8, 50.0)?;
    let lg = ln_gamma_complex(Complex64::new(1.0, y));
    let log_mod = lg.re - y.ln();
    let phase = lg.im - FRAC_PI_2;
    Ok(GammaValue {
        modulus: log_mod.exp(),
        argument: principal(phase),
        phase,
    })
}

/// Wraps an angle into (-pi, pi].
pub fn principal(theta: f64) -> f64 {
    let mut a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

pub const BESSEL_SWITCH: f64 = 30.0;
const MAX_ORDER: f64 = 50.0;
const MAX_ARG: f64 = 700.0;

/// Modified Bessel function `I_nu(x)` for `0 <= nu <= 50`, `0 <= x <= 700`.
pub fn bessel_i(nu: f64, x: f64) -> Result<f64, SpecfunError> {
    Ok(bessel_i_scaled(nu, x)? * x.exp())
}

/// `exp(-x) I_nu(x)`, free of overflow on the whole admissible range.
pub fn bessel_i_scaled(nu: f64, x: f64) -> Result<f64, SpecfunError> {
    check("nu", nu, 0.0, MAX_ORDER)?;
    if x > MAX_ARG {
        return Err(SpecfunError::Overflow(x));
    }
    check("x", x, 0.0, MAX_ARG)?;
    if x <= BESSEL_SWITCH {
        return Ok(series_scaled(nu, x));
    }
    match hankel_scaled(nu, x) {
        Some(v) => Ok(v),
        None => Ok(series_scaled(nu, x)),
    }
}

/// Ascending series, summed outward from its largest term in log scale.
pub fn bessel_i_series(nu: f64, x: f64) -> f64 {
    series_scaled(nu, x) * x.exp()
}

fn series_scaled(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let q = 0.25 * x * x;
    // t_{k+1}/t_k = q / ((k+1)(k+1+nu)); the peak is where this ratio crosses 1.
    let kmax = {
        let disc = (nu * nu + 4.0 * q).sqrt();
        (0.5 * (disc - nu - 2.0)).ceil().max(0.0)
    };
    let ln_peak = (2.0 * kmax + nu) * (0.5 * x).ln() - ln_gamma(kmax + 1.0) - ln_gamma(kmax + nu + 1.0);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut k = kmax;
    loop {
        term *= q / ((k + 1.0) * (k + 1.0 + nu));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        k += 1.0;
    }
    term = 1.0;
    k = kmax;
    while k > 0.0 {
        term *= k * (k + nu) / q;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
        k -= 1.0;
    }
    (ln_peak - x).exp() * sum
}

/// Large-argument expansion `e^x / sqrt(2 pi x) * sum (-1)^k a_k(nu) / x^k`
/// with optimal truncation; `None` when the smallest term is too large for a
/// 1e-13 relative result.
pub fn bessel_i_asymptotic(nu: f64, x: f64) -> Option<f64> {
    hankel_scaled(nu, x).map(|v| v * x.exp())
}

fn hankel_scaled(nu: f64, x: f64) -> Option<f64> {
    let mu = 4.0 * nu * nu;
    let mut sum = 1.0;
    let mut term: f64 = 1.0;
    for k in 1..200 {
        let j = (2 * k - 1) as f64;
        let next = -term * (mu - j * j) / (k as f64 * 8.0 * x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            return Some(sum / (2.0 * PI * x).sqrt());
        }
    }
    if term.abs() < 1e-13 * sum.abs() {
        Some(sum / (2.0 * PI * x).sqrt())
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::adaptive_quad;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn bessel_at_origin() {
        assert_eq!(bessel_i(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i(2.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_order_closed_form() {
        for &x in &[0.1, 1.0, 5.0, 12.0, 29.0, 31.0, 60.0, 200.0] {
            let exact = (2.0 / (PI * x)).sqrt() * x.sinh();
            assert!(rel(bessel_i(0.5, x).unwrap(), exact) < 1e-12, "x = {x}");
        }
        assert!((bessel_i(0.5, 1.0).unwrap() - 0.937_674_888_245_488).abs() < 1e-12);
    }

    #[test]
    fn i0_at_one_matches_plain_series() {
        // Naive sum of (1/4)^k / (k!)^2.
        let mut s = 0.0;
        let mut t = 1.0;
        for k in 1..40 {
            s += t;
            t *= 0.25 / (k as f64 * k as f64);
        }
        assert!(rel(bessel_i(0.0, 1.0).unwrap(), s) < 1e-13);
        assert!((s - 1.266_065_877_752_008_4).abs() < 1e-15);
    }

    #[test]
    fn integer_orders_match_integral_representation() {
        // I_n(x) = (1/pi) int_0^pi e^{x cos s} cos(ns) ds
        for &n in &[0u32, 1, 3, 7] {
            for &x in &[0.7, 4.0, 18.0] {
                let v = adaptive_quad(|s| (x * s.cos()).exp() * (n as f64 * s).cos(), 0.0, PI, 1e-12).unwrap() / PI;
                // The integrand has size e^x, which bounds the attainable absolute error.
                assert!((bessel_i(n as f64, x).unwrap() - v).abs() < 1e-11 * x.exp(), "n = {n}, x = {x}");
            }
        }
    }

    #[test]
    fn recurrence() {
        for n in 1..=10 {
            let nu = n as f64;
            for i in 0..40 {
                let x = 0.5 + 19.5 * i as f64 / 39.0;
                let lhs = bessel_i(nu - 1.0, x).unwrap() - bessel_i(nu + 1.0, x).unwrap();
                let rhs = 2.0 * nu / x * bessel_i(nu, x).unwrap();
                assert!(rel(lhs, rhs) < 1e-10, "nu = {nu}, x = {x}");
            }
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        for &nu in &[0.0, 0.5, 1.0, 2.0, 3.5] {
            let s = bessel_i_series(nu, BESSEL_SWITCH);
            let a = bessel_i_asymptotic(nu, BESSEL_SWITCH).unwrap();
            assert!(rel(a, s) < 1e-12, "nu = {nu}: {a} vs {s}");
        }
        // Both branches at a larger argument where the series is still usable.
        for &nu in &[1.0, 4.0] {
            let s = bessel_i_series(nu, 80.0);
            let a = bessel_i_asymptotic(nu, 80.0).unwrap();
            assert!(rel(a, s) < 1e-11);
        }
    }

    #[test]
    fn high_order_large_argument_falls_back() {
        assert!(bessel_i_asymptotic(40.0, 35.0).is_none());
        let v = bessel_i_scaled(40.0, 35.0).unwrap();
        let below = bessel_i_scaled(39.0, 35.0).unwrap();
        let above = bessel_i_scaled(41.0, 35.0).unwrap();
        assert!(rel(below - above, 80.0 / 35.0 * v) < 1e-11);
    }

    #[test]
    fn leading_asymptotic_form() {
        // The first correction is (4nu^2 - 1)/(8x), so 5/x holds for nu <= 3.
        for &nu in &[0.0, 1.0, 2.0, 3.0] {
            for &x in &[50.0, 100.0, 400.0] {
                let d = bessel_i_scaled(nu, x).unwrap() * (2.0 * PI * x).sqrt() - 1.0;
                assert!(d.abs() <= 5.0 / x);
            }
        }
    }

    #[test]
    fn domain_and_overflow() {
        assert!(matches!(bessel_i(51.0, 1.0), Err(SpecfunError::DomainError { .. })));
        assert!(matches!(bessel_i(1.0, -1.0), Err(SpecfunError::DomainError { .. })));
        assert!(matches!(bessel_i(1.0, 701.0), Err(SpecfunError::Overflow(_))));
        assert!(bessel_i(0.0, 700.0).unwrap().is_finite());
        assert!(gamma_imag(0.0).is_err());
        assert!(gamma_imag(51.0).is_err());
    }

    #[test]
    fn gamma_reflection_identity() {
        for &y in &[1e-8, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0, 50.0] {
            let g = gamma_imag(y).unwrap();
            let id = g.modulus * g.modulus * y * (PI * y).sinh() / PI;
            assert!((id - 1.0).abs() < 1e-10, "y = {y}: {id}");
        }
        let g = gamma_imag(1.0).unwrap();
        assert!((g.modulus - (PI / PI.sinh()).sqrt()).abs() < 1e-13);
    }

    #[test]
    fn gamma_argument_near_zero() {
        let g = gamma_imag(1e-8).unwrap();
        assert!((g.argument + FRAC_PI_2).abs() < 1e-7);
    }

    #[test]
    fn gamma_phase_matches_integral_representation() {
        // Im ln Gamma(1+iy) = int_0^inf e^{-t} [y - sin(yt)/(1-e^{-t})] / t dt
        for &y in &[0.3, 1.0, 2.5] {
            let f = |t: f64| (-t).exp() * (y - (y * t).sin() / (-(-t).exp_m1())) / t;
            let oracle = adaptive_quad(f, 0.0, 60.0, 1e-14).unwrap();
            let g = gamma_imag(y).unwrap();
            assert!((g.phase + FRAC_PI_2 - oracle).abs() < 1e-10, "y = {y}");
        }
    }

    #[test]
    fn gamma_phase_is_continuous() {
        let mut prev = gamma_imag(1e-3).unwrap().phase;
        for i in 1..=50_000 {
            let y = 1e-3 + 50.0 * i as f64 / 50_000.0;
            let y = y.min(50.0);
            let p = gamma_imag(y).unwrap().phase;
            assert!((p - prev).abs() < 0.01);
            prev = p;
        }
    }

    #[test]
    fn real_ln_gamma() {
        assert!(ln_gamma(1.0).abs() < 1e-14);
        assert!((ln_gamma(0.5) - 0.5 * PI.ln()).abs() < 1e-14);
        assert!((ln_gamma(11.0) - 3_628_800f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.25) - 1.288_022_524_698_077_5).abs() < 1e-13);
    }
}
