//! Backward integration of the t-equation at x = 0.
//!
//! Column 2 of `Phi` is carried as `(u, v) = e^{-ikt} (Phi12, Phi22)`, which obeys
//!   u' = -2ik u - E/2 v,   v' = conj(E)/2 u,   u(T) = 0, v(T) = 1,
//! with `b = u(0)` and `a = v(0)`. Its coefficients stay bounded in the upper
//! half-plane, so no exponential factor is ever formed. Column 1 is carried as
//! `(p, q) = e^{ikt} (Phi11, Phi21)` with
//!   p' = -E/2 q,   q' = 2ik q + conj(E)/2 p,   p(T) = 1, q(T) = 0,
//! and grows like `e^{2 T Im k}` towards t = 0.

use crate::numerics::{adaptive_quad, ode_advance, OdeTolerance, C64};
use crate::pulse::Pulse;

use super::ScatteringError;

/// Above this `T Im k` the first Jost column `~ e^{2 T Im k}` overflows.
pub const MAX_GROWTH_EXPONENT: f64 = 350.0;

fn check_half_plane(k: C64) -> Result<(), ScatteringError> {
    if k.im < 0.0 {
        return Err(ScatteringError::LowerHalfPlane(k));
    }
    Ok(())
}

fn check_growth(p: &Pulse, k: C64) -> Result<(), ScatteringError> {
    check_half_plane(k)?;
    if p.support_end() * k.im > MAX_GROWTH_EXPONENT {
        return Err(ScatteringError::Overflow { k, exponent: p.support_end() * k.im });
    }
    Ok(())
}

/// `1/2 int |E1| e^{-2 Im k t} dt`, the natural size of `b(k)`.
fn b_scale(p: &Pulse, k: C64) -> f64 {
    let kappa = k.im;
    let f = |t: f64| 0.5 * p.eval(t).norm() * (-2.0 * kappa * t).exp();
    // A loose tolerance suffices: the value only rescales a state variable.
    let s = adaptive_quad(f, 0.0, p.support_end(), 1e-6).unwrap_or(0.0);
    if s.is_finite() && s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Column 2 of `Phi(0; k)`: `(b, a)`.
pub(crate) fn column2(p: &Pulse, k: C64, tol: &OdeTolerance) -> Result<(C64, C64), ScatteringError> {
    check_half_plane(k)?;
    if p.is_zero() {
        return Ok((C64::new(0.0, 0.0), C64::new(1.0, 0.0)));
    }
    // u is carried as u / s so the absolute tolerance tracks the size of b.
    let s = b_scale(p, k);
    let m2ik = C64::new(0.0, -2.0) * k;
    let rhs = |t: f64, y: &[C64; 2]| {
        let e = p.eval(t);
        [m2ik * y[0] - 0.5 * e * y[1] / s, 0.5 * e.conj() * y[0] * s]
    };
    let y0 = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
    let (y, _) = ode_advance(rhs, p.support_end(), 0.0, y0, tol)?;
    Ok((y[0] * s, y[1]))
}

/// Column 2 with its k-derivative: `(b, a, db/dk, da/dk)`.
pub(crate) fn column2_with_derivative(
    p: &Pulse,
    k: C64,
    tol: &OdeTolerance,
) -> Result<[C64; 4], ScatteringError> {
    check_half_plane(k)?;
    let zero = C64::new(0.0, 0.0);
    if p.is_zero() {
        return Ok([zero, C64::new(1.0, 0.0), zero, zero]);
    }
    let s = b_scale(p, k);
    let m2i = C64::new(0.0, -2.0);
    let m2ik = m2i * k;
    let rhs = |t: f64, y: &[C64; 4]| {
        let e = p.eval(t);
        let fu = -0.5 * e / s;
        let fv = 0.5 * e.conj() * s;
        [
            m2ik * y[0] + fu * y[1],
            fv * y[0],
            m2i * y[0] + m2ik * y[2] + fu * y[3],
            fv * y[2],
        ]
    };
    let y0 = [zero, C64::new(1.0, 0.0), zero, zero];
    let (y, _) = ode_advance(rhs, p.support_end(), 0.0, y0, tol)?;
    Ok([y[0] * s, y[1], y[2] * s, y[3]])
}

/// Full `Phi(0; k)` as `[[Phi11, Phi12], [Phi21, Phi22]]`.
pub fn jost_matrix(p: &Pulse, k: C64, tol: &OdeTolerance) -> Result<[[C64; 2]; 2], ScatteringError> {
    check_growth(p, k)?;
    let (b, a) = column2(p, k, tol)?;
    if p.is_zero() {
        let (one, zero) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        return Ok([[one, zero], [zero, one]]);
    }
    let two_ik = C64::new(0.0, 2.0) * k;
    let rhs = |t: f64, y: &[C64; 2]| {
        let e = p.eval(t);
        [-0.5 * e * y[1], two_ik * y[1] + 0.5 * e.conj() * y[0]]
    };
    let y0 = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    let (c1, _) = ode_advance(rhs, p.support_end(), 0.0, y0, tol)?;
    Ok([[c1[0], b], [c1[1], a]])
}
