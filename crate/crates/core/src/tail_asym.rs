//! Asymptotics inside the cone `sigma <= x/t <= 1 - sigma`: the decaying
//! two-phase background and the solitons travelling on it.
//!
//! Notation: `tau = t - x`, `k0 = sqrt(x / tau) / 2`, `g(s) = ln(1 + |r(s)|^-2)`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use thiserror::Error;

use crate::field::FieldTriple;
use crate::numerics::{adaptive_quad_points, NumericsError, C64};
use crate::scattering::{ScatteringData, ScatteringError};
use crate::soliton_spectrum::{SolitonSpectrum, SpectrumError};
use crate::specfun::{gamma_imag, principal, SpecfunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TailError {
    #[error("|r({k})| = {modulus:e} is too small: the point sits on a real zero of b")]
    ReflectionZero { k: f64, modulus: f64 },
    #[error("tail formulas need t > x > 0, got t = {t}, x = {x}")]
    OutsideCone { t: f64, x: f64 },
    #[error("soliton index {0} is out of range")]
    NoSuchSoliton(usize),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

const R_FLOOR: f64 = 1e-12;
/// Below this relative distance to `+-k0` the difference quotients in the
/// phase integrals are replaced by their limit.
const ENDPOINT_GAP: f64 = 1e-7;

/// `g(s) = ln(1 + |a|^2/|b|^2)` and its derivative from `(a, b, a', b')`.
fn g_of(a: C64, b: C64) -> f64 {
    (a.norm_sqr() + b.norm_sqr()).ln() - b.norm_sqr().ln()
}

fn g_prime(sd: &ScatteringData, s: f64) -> Result<f64, TailError> {
    let d = sd.ab_with_derivs(C64::new(s, 0.0))?;
    let num = 2.0 * (d.a.conj() * d.da + d.b.conj() * d.db).re;
    Ok(num / (d.a.norm_sqr() + d.b.norm_sqr()) - 2.0 * (d.db / d.b).re)
}

fn g_at(sd: &ScatteringData, s: f64) -> Result<f64, ScatteringError> {
    let (a, b) = sd.ab_real(s)?;
    Ok(g_of(a, b))
}

/// `k0 = sqrt(x / tau) / 2`.
pub fn stationary_point(tau: f64, x: f64) -> f64 {
    0.5 * (x / tau).sqrt()
}

/// `(nu_l, nu_r) = (g(-k0), g(k0)) / (2 pi)`.
pub fn nu_pair(sd: &ScatteringData, k0: f64) -> Result<(f64, f64), TailError> {
    let nu = |s: f64| -> Result<f64, TailError> {
        let (a, b) = sd.ab_coeffs(C64::new(s, 0.0))?;
        let modulus = b.norm() / a.norm();
        if !(modulus >= R_FLOOR) {
            return Err(TailError::ReflectionZero { k: s, modulus });
        }
        Ok(g_of(a, b) / (2.0 * PI))
    };
    Ok((nu(-k0)?, nu(k0)?))
}

/// Breakpoints for integrals over `[-k0, k0]`: the limits and the real zeros
/// of `b` in between, where `g` has logarithmic singularities.
fn breakpoints(sd: &ScatteringData, k0: f64) -> Result<Vec<f64>, TailError> {
    let mut pts = vec![-k0];
    pts.extend(sd.real_zeros_of_b()?.iter().copied().filter(|z| z.abs() < k0));
    pts.push(k0);
    Ok(pts)
}

/// Integral of `g(s) w(s)` over `[-k0, k0]`, failures inside the integrand
/// reported after the quadrature.
fn integrate<W: Fn(f64, f64) -> f64>(sd: &ScatteringData, pts: &[f64], w: W) -> Result<f64, TailError> {
    let mut failure = None;
    let v = adaptive_quad_points(
        |s| match g_at(sd, s) {
            Ok(g) => w(s, g),
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        pts,
        sd.tolerances().quad_tol,
    )?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(v),
    }
}

/// `-(1/pi) int (g(s) - g(c)) / (s - c) ds` with `c = -k0` or `c = k0`.
fn phase_integral(sd: &ScatteringData, pts: &[f64], k0: f64, c: f64) -> Result<f64, TailError> {
    let gc = g_at(sd, c)?;
    let slope = g_prime(sd, c)?;
    let v = integrate(sd, pts, |s, g| {
        let d = s - c;
        if d.abs() < ENDPOINT_GAP * k0 {
            slope
        } else {
            (g - gc) / d
        }
    })?;
    Ok(-v / PI)
}

/// Phase data of the background at one point of the tail region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPhases {
    pub k0: f64,
    pub tau: f64,
    pub nu_l: f64,
    pub nu_r: f64,
    pub omega_l: f64,
    pub omega_r: f64,
    /// The `-(1/pi) int ...` terms.
    pub integral_l: f64,
    pub integral_r: f64,
    /// The `2 sum arg(...)` terms.
    pub soliton_sum_l: f64,
    pub soliton_sum_r: f64,
}

/// `(omega_l, omega_r)` at `(t, x)`, with every soliton of modulus below `k0`
/// in the phase sums.
pub fn omega_pair(sd: &ScatteringData, spec: &SolitonSpectrum, t: f64, x: f64) -> Result<TailPhases, TailError> {
    let tau = t - x;
    if !(tau > 0.0 && x > 0.0) {
        return Err(TailError::OutsideCone { t, x });
    }
    omega_pair_at(sd, spec, tau, stationary_point(tau, x), None)
}

/// Phases at given `(tau, k0)`; soliton `exclude` is left out of the sums.
pub fn omega_pair_at(
    sd: &ScatteringData,
    spec: &SolitonSpectrum,
    tau: f64,
    k0: f64,
    exclude: Option<usize>,
) -> Result<TailPhases, TailError> {
    let (nu_l, nu_r) = nu_pair(sd, k0)?;
    let pts = breakpoints(sd, k0)?;
    let integral_l = phase_integral(sd, &pts, k0, -k0)?;
    let integral_r = phase_integral(sd, &pts, k0, k0)?;

    let (mut soliton_sum_l, mut soliton_sum_r) = (0.0, 0.0);
    for (j, z) in spec.zeros.iter().enumerate() {
        if Some(j) == exclude || z.k.norm() >= k0 {
            continue;
        }
        soliton_sum_l += 2.0 * ((k0 + z.k.conj()) / (k0 + z.k)).arg();
        soliton_sum_r += 2.0 * ((k0 - z.k.conj()) / (k0 - z.k)).arg();
    }

    let (al, bl) = sd.ab_coeffs(C64::new(-k0, 0.0))?;
    let (ar, br) = sd.ab_coeffs(C64::new(k0, 0.0))?;
    let lg = (16.0 * tau * k0).ln();
    let omega_l = 4.0 * tau * k0 - nu_l * lg + integral_l + (al * bl).arg() + gamma_imag(nu_l)?.argument + soliton_sum_l
        - FRAC_PI_4;
    let omega_r = -4.0 * tau * k0 + nu_r * lg + integral_r + (ar * br).arg() - gamma_imag(nu_r)?.argument + soliton_sum_r
        + FRAC_PI_4;
    Ok(TailPhases {
        k0,
        tau,
        nu_l,
        nu_r,
        omega_l,
        omega_r,
        integral_l,
        integral_r,
        soliton_sum_l,
        soliton_sum_r,
    })
}

/// Soliton `j` at `(t, x)` with the correction terms of its neighbourhood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonState {
    pub j: usize,
    pub k: C64,
    pub ln_w_abs: f64,
    pub w_abs: f64,
    pub w_arg: f64,
    pub a: f64,
    pub b: C64,
    pub p: f64,
    pub q: C64,
    pub x_term: C64,
    pub y_term: C64,
    pub phases: TailPhases,
}

/// `A_j`, `B_j` from `ln |w|` and `arg w`, without forming `|w|^2`.
pub fn soliton_amplitudes(k: C64, ln_w_abs: f64, w_arg: f64) -> (f64, C64) {
    let im = k.im;
    let a = 2.0 * im / (1.0 + (-2.0 * ln_w_abs).exp());
    let b = C64::from_polar(-im / ln_w_abs.cosh(), -w_arg);
    (a, b)
}

/// `P = 1 - 2|B|^2/|k|^2`, `Q = -2i B / conj(k) (1 - i A / k)`.
pub fn density_terms(k: C64, a: f64, b: C64) -> (f64, C64) {
    let i = C64::new(0.0, 1.0);
    let p = 1.0 - 2.0 * b.norm_sqr() / k.norm_sqr();
    let q = -2.0 * i * b / k.conj() * (1.0 - i * a / k);
    (p, q)
}

pub fn soliton_state(
    sd: &ScatteringData,
    spec: &SolitonSpectrum,
    j: usize,
    t: f64,
    x: f64,
) -> Result<SolitonState, TailError> {
    let tau = t - x;
    if !(tau > 0.0 && x > 0.0) {
        return Err(TailError::OutsideCone { t, x });
    }
    let zero = spec.zeros.get(j).ok_or(TailError::NoSuchSoliton(j))?;
    let k = zero.k;
    let (re, im) = (k.re, k.im);
    let k0 = stationary_point(tau, x);
    let phases = omega_pair_at(sd, spec, tau, k0, Some(j))?;
    let pts = breakpoints(sd, k0)?;

    let poisson = integrate(sd, &pts, |s, g| g / ((s - re).powi(2) + im * im))?;
    let conjugate = integrate(sd, &pts, |s, g| (s - re) * g / ((s - re).powi(2) + im * im))?;
    let (mut ln_prod, mut arg_sum) = (0.0, 0.0);
    for zp in &spec.zeros[..j] {
        let ratio = (k - zp.k) / (k - zp.k.conj());
        ln_prod += 2.0 * ratio.norm().ln();
        arg_sum += 2.0 * ratio.arg();
    }
    let ab = zero.a * zero.db;
    let q = x / (4.0 * k.norm_sqr());
    let ln_w_abs = -(2.0 * im * ab.norm()).ln() - 2.0 * im * (tau - q) - im / PI * poisson + ln_prod;
    let w_arg = principal(-ab.arg() + 2.0 * re * (tau + q) + conjugate / PI + arg_sum);

    let (a, b) = soliton_amplitudes(k, ln_w_abs, w_arg);
    let (p, qq) = density_terms(k, a, b);
    let (x_term, y_term) = corrections(&phases, k, a, b);
    Ok(SolitonState {
        j,
        k,
        ln_w_abs,
        w_abs: ln_w_abs.exp(),
        w_arg,
        a,
        b,
        p,
        q: qq,
        x_term,
        y_term,
        phases,
    })
}

/// The `X`, `Y` correction terms.
fn corrections(ph: &TailPhases, k: C64, a: f64, b: C64) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let s = 1.0 / (2.0 * (ph.k0 * ph.tau).sqrt());
    let (el, er) = (C64::from_polar(1.0, ph.omega_l), C64::from_polar(1.0, ph.omega_r));
    let (kp, kpc) = (ph.k0 + k, ph.k0 + k.conj());
    let (km, kmc) = (ph.k0 - k, ph.k0 - k.conj());
    let (sl, sr) = (ph.nu_l.sqrt() * s, ph.nu_r.sqrt() * s);

    let x_term = sl * ((1.0 + i * a / kpc) * b * el.conj() / kpc - (1.0 - i * a / kp) * b.conj() * el / kp)
        + sr * ((1.0 - i * a / kmc) * b * er.conj() / kmc - (1.0 + i * a / km) * b.conj() * er / km);
    let y_term = i * sl * (el * (1.0 - i * a / kp).powi(2) + b * b * el.conj() / (kpc * kpc))
        - i * sr * (er * (1.0 + i * a / km).powi(2) + b * b * er.conj() / (kmc * kmc));
    (x_term, y_term)
}

/// Leading-order fields in the tail region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailValue {
    pub field: FieldTriple,
    /// Order of the neglected terms, `1/tau`.
    pub error_scale: f64,
    pub phases: TailPhases,
    pub soliton: Option<SolitonState>,
}

/// Background or near-soliton formulas, chosen by matching `x/t` against the
/// soliton velocities within `eps`.
pub fn eval_tail(
    sd: &ScatteringData,
    spec: &SolitonSpectrum,
    t: f64,
    x: f64,
    eps: f64,
) -> Result<TailValue, TailError> {
    let tau = t - x;
    if !(tau > 0.0 && x > 0.0) {
        return Err(TailError::OutsideCone { t, x });
    }
    let error_scale = 1.0 / tau;
    match spec.velocity_match(t, x, eps)? {
        None => {
            let phases = omega_pair(sd, spec, t, x)?;
            Ok(TailValue {
                field: background(&phases),
                error_scale,
                phases,
                soliton: None,
            })
        }
        Some(j) => {
            let st = soliton_state(sd, spec, j, t, x)?;
            Ok(TailValue {
                field: near_soliton(&st),
                error_scale,
                phases: st.phases,
                soliton: Some(st),
            })
        }
    }
}

/// Away-from-solitons leading order.
pub fn background(ph: &TailPhases) -> FieldTriple {
    let (sl, sr) = (ph.nu_l.sqrt(), ph.nu_r.sqrt());
    let e = (2.0 * ph.k0.sqrt() / ph.tau.sqrt())
        * (C64::from_polar(sl, ph.omega_l) + C64::from_polar(sr, ph.omega_r));
    let rho = (1.0 / (ph.tau * ph.k0).sqrt())
        * (C64::from_polar(sl, ph.omega_l + FRAC_PI_2) - C64::from_polar(sr, ph.omega_r + FRAC_PI_2));
    FieldTriple::new(e, -1.0, rho)
}

/// Near-soliton leading order.
pub fn near_soliton(st: &SolitonState) -> FieldTriple {
    let i = C64::new(0.0, 1.0);
    let ph = &st.phases;
    let (k, a, b) = (st.k, st.a, st.b);
    let (el, er) = (C64::from_polar(1.0, ph.omega_l), C64::from_polar(1.0, ph.omega_r));
    let (kp, kpc) = (ph.k0 + k, ph.k0 + k.conj());
    let (km, kmc) = (ph.k0 - k, ph.k0 - k.conj());
    let cl = 2.0 * (ph.k0 * ph.nu_l).sqrt() / ph.tau.sqrt();
    let cr = 2.0 * (ph.k0 * ph.nu_r).sqrt() / ph.tau.sqrt();
    let e = 4.0 * b
        + cl * ((1.0 - i * a / kp).powi(2) * el + b * b * el.conj() / (kpc * kpc))
        + cr * ((1.0 + i * a / km).powi(2) * er + b * b * er.conj() / (kmc * kmc));
    let (p, q, xt, yt) = (st.p, st.q, st.x_term, st.y_term);
    let n = -p + (q * yt.conj() + q.conj() * yt).re;
    let rho = q + 2.0 * yt * p + 2.0 * xt * q;
    FieldTriple::new(e, n, rho)
}
