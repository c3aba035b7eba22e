//! Near-light-cone asymptotics: region bands in `(t, x)`, the leading-order
//! fields in each band and the peak times of the soliton train.
//!
//! Notation: `tau = t - x`, `y = sqrt(x tau)`, `xi = 2y`, `k0 = x / xi`,
//! `L = ln x`, `LL = ln ln x`. The bands are intervals in `xi`. Near the cone
//! at large `x` the offset `tau` is far below the resolution of `t`, so every
//! operation has a form taking `tau` directly.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

use crate::field::FieldTriple;
use crate::numerics::C64;
use crate::scattering::{ScatteringData, ScatteringError, DIRECT_KAPPA_T_MAX};
use crate::specfun::{bessel_i, ln_gamma, SpecfunError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LightconeError {
    #[error("formula requested for region {requested} but the point lies in {found}")]
    WrongRegion { requested: Region, found: Region },
    #[error("no peak of order {n} at x = {x}: {reason}")]
    NoRoot { x: f64, n: u32, reason: String },
    #[error("invalid band parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Causal,
    PartI,
    PartII,
    PartIII,
    PartIV(u32),
    Tail,
    Unsupported,
}

impl Region {
    /// Band index `n` for Part IV.
    pub fn band_index(&self) -> Option<u32> {
        match self {
            Region::PartIV(n) => Some(*n),
            _ => None,
        }
    }

    /// Whether the region is one of the near-cone parts I to IV.
    pub fn is_near_cone(&self) -> bool {
        matches!(self, Region::PartI | Region::PartII | Region::PartIII | Region::PartIV(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Region::Causal => "causal",
            Region::PartI => "part_i",
            Region::PartII => "part_ii",
            Region::PartIII => "part_iii",
            Region::PartIV(_) => "part_iv",
            Region::Tail => "tail",
            Region::Unsupported => "unsupported",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::PartIV(n) => write!(f, "part_iv({n})"),
            other => f.write_str(other.name()),
        }
    }
}

/// Free constants of the band definitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandParams {
    pub eps1: f64,
    pub eps2: f64,
    /// Lower-edge constant of Part III, at least `m + eps1`.
    pub k_big: f64,
    /// Constant of the outer cap `xi^2 <= m^2 L^2 + C L LL` on Part IV.
    pub c_cap: f64,
    /// Aperture of the tail cone `sigma <= x/t <= 1 - sigma`.
    pub sigma: f64,
}

impl BandParams {
    pub const DEFAULT_C_CAP: f64 = 20.0;
    pub const DEFAULT_SIGMA: f64 = 0.1;

    pub fn for_order(m: f64) -> Self {
        Self {
            eps1: 0.25,
            eps2: 0.25,
            k_big: m + 0.25,
            c_cap: Self::DEFAULT_C_CAP,
            sigma: Self::DEFAULT_SIGMA,
        }
    }

    pub fn validate(&self, m: f64) -> Result<(), LightconeError> {
        let bad = |s: String| Err(LightconeError::InvalidParameter(s));
        if !(m.is_finite() && m > 0.0) {
            return bad(format!("m = {m} must be positive"));
        }
        if !(self.eps1 > 0.0) {
            return bad(format!("eps1 = {} must be positive", self.eps1));
        }
        if !(self.eps2 > 0.0 && self.eps2 < 0.5) {
            return bad(format!("eps2 = {} must lie in (0, 1/2)", self.eps2));
        }
        if !(self.k_big >= m + self.eps1) {
            return bad(format!("K = {} must be at least m + eps1 = {}", self.k_big, m + self.eps1));
        }
        if !self.c_cap.is_finite() {
            return bad(format!("C = {} must be finite", self.c_cap));
        }
        if !(self.sigma > 0.0 && self.sigma < 0.5) {
            return bad(format!("sigma = {} must lie in (0, 1/2)", self.sigma));
        }
        Ok(())
    }
}

/// Classification result with the quantities used to decide it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionTag {
    pub region: Region,
    pub m: f64,
    /// `k0`, NaN when `t <= x`.
    pub k0: f64,
    /// `2 sqrt(x (t - x))`, NaN when `t <= x`.
    pub xi: f64,
    /// Band edges: in `xi` for parts I to IV, in `x/t` for the tail, NaN otherwise.
    pub band: (f64, f64),
}

/// Derived quantities at a point strictly above the light cone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightconePoint {
    pub tau: f64,
    pub x: f64,
    pub m: f64,
    pub k0: f64,
    pub xi: f64,
    pub p1: f64,
    pub p2: f64,
}

impl LightconePoint {
    pub fn new(t: f64, x: f64, m: f64) -> Option<Self> {
        Self::from_offset(t - x, x, m)
    }

    pub fn from_offset(tau: f64, x: f64, m: f64) -> Option<Self> {
        if !(tau > 0.0 && x > 0.0) {
            return None;
        }
        let y = (x * tau).sqrt();
        let (l, ly) = (x.ln(), y.ln());
        Some(Self {
            tau,
            x,
            m,
            k0: 0.5 * (x / tau).sqrt(),
            xi: 2.0 * y,
            p1: m * l - m * ly - 2.0 * y,
            p2: m * l - 2.0 * y - (m - 0.5) * ly,
        })
    }

    pub fn y(&self) -> f64 {
        0.5 * self.xi
    }

    /// `chi_n = ln(|r(i k0)| n! / (sqrt(pi) 2^{3n+2}))`.
    pub fn chi(n: u32, r_abs: f64) -> f64 {
        r_abs.ln() + ln_gamma(n as f64 + 1.0) - 0.5 * PI.ln() - (3.0 * n as f64 + 2.0) * 2f64.ln()
    }

    /// `Theta_n = xi - (n + 1/2) ln y + chi_n`.
    pub fn theta(&self, n: u32, r_abs: f64) -> f64 {
        self.xi - (n as f64 + 0.5) * self.y().ln() + Self::chi(n, r_abs)
    }
}

struct Logs {
    l: f64,
    ll: f64,
}

fn logs(x: f64) -> Option<Logs> {
    // Parts II to IV need ln ln x > 0.
    if x > std::f64::consts::E {
        let l = x.ln();
        Some(Logs { l, ll: l.ln() })
    } else {
        None
    }
}

/// Part IV band `n` in `xi`: `[mL + (n-m) LL, mL + (n+1-m) LL]`.
pub fn part_iv_band(x: f64, m: f64, n: u32) -> Option<(f64, f64)> {
    let g = logs(x)?;
    let n = n as f64;
    Some((m * g.l + (n - m) * g.ll, m * g.l + (n + 1.0 - m) * g.ll))
}

/// Part III band in `xi`.
pub fn part_iii_band(x: f64, m: f64, params: &BandParams) -> Option<(f64, f64)> {
    let g = logs(x)?;
    Some((m * g.l - params.k_big * g.ll, m * g.l - (m + params.eps2 - 0.5) * g.ll))
}

/// Part II band in `xi`; its lower edge is `t = x + 1/x`.
pub fn part_ii_band(x: f64, m: f64, params: &BandParams) -> Option<(f64, f64)> {
    let g = logs(x)?;
    Some((2.0, m * g.l - (m + params.eps1) * g.ll))
}

/// Relative slack on lower band edges so that a point placed on an edge
/// through `tau = xi^2 / (4x)` still lands in the higher part.
const EDGE_SLACK: f64 = 1e-12;

fn inside(v: f64, (lo, hi): (f64, f64)) -> bool {
    lo.max(0.0) <= v * (1.0 + EDGE_SLACK) && v <= hi
}

/// Assigns `(t, x)` to exactly one region. On shared boundaries the
/// higher-numbered part wins.
pub fn classify(t: f64, x: f64, m: f64, params: &BandParams) -> RegionTag {
    if !(t >= 0.0) {
        return classify_offset(f64::NAN, x, m, params);
    }
    classify_offset(t - x, x, m, params)
}

/// [`classify`] at `t = x + tau`.
pub fn classify_offset(tau: f64, x: f64, m: f64, params: &BandParams) -> RegionTag {
    let nan = (f64::NAN, f64::NAN);
    let mut tag = RegionTag {
        region: Region::Unsupported,
        m,
        k0: f64::NAN,
        xi: f64::NAN,
        band: nan,
    };
    if !(x > 0.0 && x + tau >= 0.0) {
        return tag;
    }
    let Some(pt) = LightconePoint::from_offset(tau, x, m) else {
        tag.region = Region::Causal;
        return tag;
    };
    tag.k0 = pt.k0;
    tag.xi = pt.xi;
    let xi = pt.xi;

    if let Some(g) = logs(x) {
        let n_real = ((xi * (1.0 + EDGE_SLACK) - m * g.l) / g.ll + m).floor();
        let capped = xi * xi <= m * m * g.l * g.l + params.c_cap * g.l * g.ll;
        if n_real >= 0.0 && n_real < u32::MAX as f64 && capped {
            let n = n_real as u32;
            if let Some(band) = part_iv_band(x, m, n).filter(|b| inside(xi, *b)) {
                tag.region = Region::PartIV(n);
                tag.band = band;
                return tag;
            }
        }
        for (region, band) in [
            (Region::PartIII, part_iii_band(x, m, params)),
            (Region::PartII, part_ii_band(x, m, params)),
        ] {
            if let Some(band) = band.filter(|b| inside(xi, *b)) {
                tag.region = region;
                tag.band = band;
                return tag;
            }
        }
    }
    if xi <= 2.0 {
        tag.region = Region::PartI;
        tag.band = (0.0, 2.0);
        return tag;
    }
    let ratio = x / (x + tau);
    if params.sigma <= ratio && ratio <= 1.0 - params.sigma {
        tag.region = Region::Tail;
        tag.band = (params.sigma, 1.0 - params.sigma);
    }
    tag
}

/// Error scales attached to a leading-order value: `nominal` is the quantity
/// the error bound is stated in, `e_abs` the implied absolute bound on `E`
/// up to an unknown constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorScale {
    pub nominal: f64,
    pub e_abs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightconeValue {
    pub field: FieldTriple,
    pub error: ErrorScale,
    pub r: C64,
    /// `Theta_n` for Part IV, NaN elsewhere.
    pub theta: f64,
}

fn sech_tanh(theta: f64) -> (f64, f64) {
    let e = (-2.0 * theta.abs()).exp();
    let sech = 2.0 * (-theta.abs()).exp() / (1.0 + e);
    (sech, theta.tanh())
}

/// Leading-order fields for a point tagged as part I to IV. The point must
/// classify to `tag.region` under `params`.
pub fn eval_lightcone(
    tag: &RegionTag,
    t: f64,
    x: f64,
    sd: &ScatteringData,
    params: &BandParams,
) -> Result<LightconeValue, LightconeError> {
    eval_lightcone_offset(tag, t - x, x, sd, params)
}

/// [`eval_lightcone`] at `t = x + tau`.
pub fn eval_lightcone_offset(
    tag: &RegionTag,
    tau: f64,
    x: f64,
    sd: &ScatteringData,
    params: &BandParams,
) -> Result<LightconeValue, LightconeError> {
    let found = classify_offset(tau, x, tag.m, params).region;
    if found != tag.region || !tag.region.is_near_cone() {
        return Err(LightconeError::WrongRegion {
            requested: tag.region,
            found,
        });
    }
    eval_formula(tag.region, tau, x, tag.m, sd)
}

/// The formula of `region` at `t = x + tau` without checking the band, used
/// for comparisons across band edges.
pub fn eval_formula(region: Region, tau: f64, x: f64, m: f64, sd: &ScatteringData) -> Result<LightconeValue, LightconeError> {
    let pt = LightconePoint::from_offset(tau, x, m).ok_or(LightconeError::WrongRegion {
        requested: region,
        found: Region::Causal,
    })?;
    let r = sd.reflection_imag_axis(pt.k0)?;
    Ok(formula(region, &pt, r)?)
}

/// Closed-form evaluation given `r = r(i k0)`.
pub fn formula(region: Region, pt: &LightconePoint, r: C64) -> Result<LightconeValue, LightconeError> {
    let (k0, xi, y, m) = (pt.k0, pt.xi, pt.y(), pt.m);
    let mut theta = f64::NAN;
    let (field, error) = match region {
        Region::PartI | Region::PartII => {
            let i_lo = bessel_i(m - 1.0, xi)?;
            let i_m = bessel_i(m, xi)?;
            let field = FieldTriple::new(r * (4.0 * k0 * i_lo), 1.0 - 2.0 * r.norm_sqr() * i_m * i_m, r * (2.0 * i_m));
            let error = if region == Region::PartI {
                let s = k0.powf(-m);
                ErrorScale { nominal: s, e_abs: s }
            } else {
                let s = (-pt.p1).exp();
                ErrorScale {
                    nominal: s,
                    e_abs: s + k0 * s * s,
                }
            };
            (field, error)
        }
        Region::PartIII => {
            let g = xi.exp() / (PI.sqrt() * y.sqrt());
            let field = FieldTriple::new(
                r * (2.0 * k0 * g),
                1.0 - r.norm_sqr() * (2.0 * xi).exp() / (2.0 * PI * y),
                r * g,
            );
            let s = (-pt.p2).exp();
            let rel = 1.0 / pt.x.ln() + s;
            (
                field,
                ErrorScale {
                    nominal: s,
                    e_abs: field.e.norm() * rel,
                },
            )
        }
        Region::PartIV(n) => {
            let th = pt.theta(n, r.norm());
            theta = th;
            let phase = if r.norm() > 0.0 { r / r.norm() } else { C64::new(1.0, 0.0) };
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let (sech, tanh) = sech_tanh(th);
            let field = FieldTriple::new(
                phase * (4.0 * k0 * sign * sech),
                1.0 - 2.0 * sech * sech,
                phase * (-2.0 * sign * tanh * sech),
            );
            let s = pt.x.ln().powf(-0.5);
            (
                field,
                ErrorScale {
                    nominal: s,
                    e_abs: 4.0 * k0 * s,
                },
            )
        }
        other => {
            return Err(LightconeError::WrongRegion {
                requested: other,
                found: other,
            })
        }
    };
    Ok(LightconeValue { field, error, r, theta })
}

/// `(ln |r(i k0)|, d ln|r(i k0)| / d k0)`.
fn log_reflection(sd: &ScatteringData, k0: f64) -> Result<(f64, f64), LightconeError> {
    if sd.pulse().support_end() * k0 <= DIRECT_KAPPA_T_MAX {
        let d = sd.ab_with_derivs(C64::new(0.0, k0))?;
        let dlog = d.db / d.b - d.da / d.a;
        Ok(((d.b / d.a).norm().ln(), (C64::new(0.0, 1.0) * dlog).re))
    } else {
        let fit = sd.fit_tail()?;
        Ok((fit.eval(k0).norm().ln(), -fit.m / k0))
    }
}

/// Starting value for the peak search from the inversion of
/// `y - gamma ln y = z`, with `r` replaced by its tail model.
pub fn peak_seed(x: f64, n: u32, m_fit: f64, c_abs: f64) -> f64 {
    let cn = LightconePoint::chi(n, c_abs);
    let z = 0.5 * (m_fit * x.ln() - m_fit * 2f64.ln() - cn);
    let gamma = 0.5 * (n as f64 + 0.5 - m_fit);
    let lz = z.ln();
    z + gamma * lz + gamma * gamma * lz / z
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub t: f64,
    /// `t - x`, exact up to rounding even where `t` cannot resolve it.
    pub tau: f64,
    pub y: f64,
}

/// Time `t*` of the `n`-th peak at `x`, where `Theta_n(t*, x) = 0`.
pub fn predict_peaks(x: f64, n: u32, sd: &ScatteringData, m: f64) -> Result<Peak, LightconeError> {
    let no_root = |reason: String| LightconeError::NoRoot { x, n, reason };
    if part_iv_band(x, m, n).is_none() {
        return Err(no_root("band is empty for x <= e".into()));
    }
    let fit = sd.fit_tail()?;
    let mut y = peak_seed(x, n, fit.m, fit.c.norm());
    if !(y.is_finite() && y > 0.0) {
        return Err(no_root(format!("seed y = {y} is not positive")));
    }
    let nh = n as f64 + 0.5;
    for _ in 0..100 {
        let k0 = x / (2.0 * y);
        let (lr, dlr) = log_reflection(sd, k0)?;
        let chi_rest = LightconePoint::chi(n, 1.0);
        let f = 2.0 * y - nh * y.ln() + lr + chi_rest;
        let df = 2.0 - nh / y - dlr * k0 / y;
        if !(df > 0.0) {
            return Err(no_root(format!("Theta_n not increasing at y = {y}")));
        }
        let step = (f / df).clamp(-0.5 * y, 0.5 * y);
        y -= step;
        if step.abs() <= 1e-14 * y {
            let tau = y * y / x;
            return Ok(Peak { t: x + tau, tau, y });
        }
    }
    Err(no_root("Newton iteration did not converge".into()))
}

#[cfg(test)]
mod tests;
