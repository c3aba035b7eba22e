use super::{NumericsError, C64};

/// Mixed error control: component `i` is accepted when its local error is
/// below `abs + rel * |y_i|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub rel: f64,
    pub abs: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// PI controller gains (Hairer & Wanner, DOPRI5 defaults).
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 2_000_000;

#[inline]
fn axpy<const N: usize>(y: &[C64; N], h: f64, terms: &[(f64, &[C64; N])]) -> [C64; N] {
    let mut out = *y;
    for (c, k) in terms {
        let s = h * c;
        for i in 0..N {
            out[i] += k[i] * s;
        }
    }
    out
}

/// Advances `y' = rhs(t, y)` from `t0` to `t1` (either direction) with an
/// embedded Dormand-Prince 5(4) pair and PI step-size control.
///
/// The result is a deterministic function of the inputs.
pub fn ode_advance<const N: usize, F>(
    mut rhs: F,
    t0: f64,
    t1: f64,
    y0: [C64; N],
    tol: &OdeTolerance,
) -> Result<([C64; N], OdeStats), NumericsError>
where
    F: FnMut(f64, &[C64; N]) -> [C64; N],
{
    let mut stats = OdeStats::default();
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((y0, stats));
    }
    let dir = span.signum();
    let min_step = 1e-14 * span.abs();

    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y);
    stats.evaluations += 1;

    let norm = |e: &[C64; N], ya: &[C64; N], yb: &[C64; N]| -> f64 {
        let mut acc = 0.0;
        for i in 0..N {
            let sc = tol.abs + tol.rel * ya[i].norm().max(yb[i].norm());
            let r = e[i].norm() / sc;
            acc += r * r;
        }
        (acc / N as f64).sqrt()
    };

    // Initial step guess (Hairer, Norsett & Wanner, II.4).
    let mut h = {
        let zero = [C64::new(0.0, 0.0); N];
        let d0 = norm(&y, &y, &zero);
        let d1 = norm(&k1, &y, &zero);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span.abs());
        let y1 = axpy(&y, dir * h0, &[(1.0, &k1)]);
        let k = rhs(t + dir * h0, &y1);
        stats.evaluations += 1;
        let mut diff = [C64::new(0.0, 0.0); N];
        for i in 0..N {
            diff[i] = k[i] - k1[i];
        }
        let d2 = norm(&diff, &y, &zero) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span.abs())
    };
    let mut err_prev: f64 = 1e-4;
    let mut last_rejected = false;

    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(NumericsError::StepUnderflow { t, h });
        }
        let remaining = (t1 - t).abs();
        let mut final_step = false;
        if h >= remaining {
            h = remaining;
            final_step = true;
        }
        if h < min_step && !final_step {
            return Err(NumericsError::StepUnderflow { t, h });
        }
        let hs = dir * h;

        let y2 = axpy(&y, hs, &[(A21, &k1)]);
        let k2 = rhs(t + C2 * hs, &y2);
        let y3 = axpy(&y, hs, &[(A31, &k1), (A32, &k2)]);
        let k3 = rhs(t + C3 * hs, &y3);
        let y4 = axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = rhs(t + C4 * hs, &y4);
        let y5 = axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = rhs(t + C5 * hs, &y5);
        let y6 = axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let t_new = if final_step { t1 } else { t + hs };
        let k6 = rhs(t + hs, &y6);
        let y_new = axpy(&y, hs, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(t_new, &y_new);
        stats.evaluations += 6;

        let err_vec = {
            let mut e = [C64::new(0.0, 0.0); N];
            for i in 0..N {
                e[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * hs;
            }
            e
        };
        let err = norm(&err_vec, &y, &y_new);
        if !err.is_finite() {
            if y_new.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) && h <= min_step {
                return Err(NumericsError::NonFinite { t });
            }
            h *= FAC_MIN;
            stats.rejected += 1;
            last_rejected = true;
            continue;
        }

        if err <= 1.0 {
            let mut fac = if err == 0.0 {
                FAC_MAX
            } else {
                SAFETY * err.powf(-ALPHA) * err_prev.powf(BETA)
            };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            err_prev = err.max(1e-4);
            t = t_new;
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            last_rejected = false;
            h *= fac;
        } else {
            let fac = (SAFETY * err.powf(-ALPHA)).clamp(FAC_MIN, 1.0);
            h *= fac;
            stats.rejected += 1;
            last_rejected = true;
        }
    }
    Ok((y, stats))
}
