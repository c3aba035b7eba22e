//! Direct scattering of the input pulse: the Jost matrix of the t-equation at
//! x = 0, the coefficients `a`, `b`, the reflection coefficient `r = b/a`,
//! `b'(k)` and the large-k tail constants `(m, C)`.

mod cache;
mod jost;
mod tail;

use std::sync::OnceLock;

use thiserror::Error;

use crate::numerics::{NumericsError, Tolerances, C64};
use crate::pulse::Pulse;

pub use cache::RealLineCache;
pub use jost::{jost_matrix, MAX_GROWTH_EXPONENT};
pub use tail::{TailFit, TailFitOptions};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScatteringError {
    #[error("growth factor exp(T Im k) too large at k = {k} (T Im k = {exponent})")]
    Overflow { k: C64, exponent: f64 },
    #[error("k = {0} lies in the lower half-plane")]
    LowerHalfPlane(C64),
    #[error("|a(k)| = {modulus:e} too small at k = {k}")]
    DivisionNearZero { k: C64, modulus: f64 },
    #[error("tail fit rejected: residual {residual:e}, fitted m = {m}")]
    FitRejected { m: f64, residual: f64 },
    #[error("the pulse is identically zero")]
    TrivialPulse,
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringOptions {
    pub tol: Tolerances,
    /// Half-width of the real-line interpolation table.
    pub cache_extent: f64,
    /// Target interpolation error of the table.
    pub cache_tol: f64,
    pub tail: TailFitOptions,
}

impl Default for ScatteringOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            cache_extent: 8.0,
            cache_tol: 1e-9,
            tail: TailFitOptions::default(),
        }
    }
}

/// Scattering data of one pulse. Evaluation is pure; the real-line table
/// and the tail fit are computed once on first use.
#[derive(Debug)]
pub struct ScatteringData {
    pulse: Pulse,
    opts: ScatteringOptions,
    cache: OnceLock<Result<RealLineCache, ScatteringError>>,
    tail: OnceLock<Result<TailFit, ScatteringError>>,
}

/// `(a, b)` together with their k-derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbDerivs {
    pub a: C64,
    pub b: C64,
    pub da: C64,
    pub db: C64,
}

const A_FLOOR: f64 = 1e-12;

/// Beyond `T Im k` of this size the stiff decay of the column-2 system makes
/// direct integration slow, and `r` on the imaginary axis comes from the tail fit.
pub const DIRECT_KAPPA_T_MAX: f64 = 2000.0;

impl ScatteringData {
    pub fn new(pulse: Pulse, opts: ScatteringOptions) -> Self {
        Self {
            pulse,
            opts,
            cache: OnceLock::new(),
            tail: OnceLock::new(),
        }
    }

    pub fn with_defaults(pulse: Pulse) -> Self {
        Self::new(pulse, ScatteringOptions::default())
    }

    pub fn pulse(&self) -> &Pulse {
        &self.pulse
    }

    pub fn options(&self) -> &ScatteringOptions {
        &self.opts
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.opts.tol
    }

    pub fn jost_matrix(&self, k: C64) -> Result<[[C64; 2]; 2], ScatteringError> {
        jost_matrix(&self.pulse, k, &self.opts.tol.ode())
    }

    /// `(a(k), b(k))` by direct integration, `Im k >= 0`.
    pub fn ab_coeffs(&self, k: C64) -> Result<(C64, C64), ScatteringError> {
        let (b, a) = jost::column2(&self.pulse, k, &self.opts.tol.ode())?;
        Ok((a, b))
    }

    pub fn ab_with_derivs(&self, k: C64) -> Result<AbDerivs, ScatteringError> {
        let [b, a, db, da] = jost::column2_with_derivative(&self.pulse, k, &self.opts.tol.ode())?;
        Ok(AbDerivs { a, b, da, db })
    }

    /// `r(k) = b(k)/a(k)` by direct integration.
    pub fn reflection(&self, k: C64) -> Result<C64, ScatteringError> {
        let (a, b) = self.ab_coeffs(k)?;
        if a.norm() < A_FLOOR {
            return Err(ScatteringError::DivisionNearZero { k, modulus: a.norm() });
        }
        Ok(b / a)
    }

    /// `b'(k)` from the variational system.
    pub fn b_deriv(&self, k: C64) -> Result<C64, ScatteringError> {
        Ok(self.ab_with_derivs(k)?.db)
    }

    /// `|a|^2 + |b|^2 - 1`, which vanishes on the real line.
    pub fn unitarity_defect(&self, k: f64) -> Result<f64, ScatteringError> {
        let (a, b) = self.ab_coeffs(C64::new(k, 0.0))?;
        Ok(a.norm_sqr() + b.norm_sqr() - 1.0)
    }

    pub fn real_line_cache(&self) -> Result<&RealLineCache, ScatteringError> {
        self.cache
            .get_or_init(|| {
                RealLineCache::build(
                    &self.pulse,
                    self.opts.cache_extent,
                    self.opts.cache_tol,
                    &self.opts.tol.ode(),
                )
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `(a(s), b(s))` on the real line, from the table when `s` lies inside it.
    pub fn ab_real(&self, s: f64) -> Result<(C64, C64), ScatteringError> {
        if let Some(v) = self.real_line_cache()?.ab(s) {
            return Ok(v);
        }
        self.ab_coeffs(C64::new(s, 0.0))
    }

    /// Real zeros of `b` within the table range.
    pub fn real_zeros_of_b(&self) -> Result<&[f64], ScatteringError> {
        Ok(self.real_line_cache()?.real_zeros())
    }

    /// Measured tail constants: `r(i kappa) ~ C (i kappa)^{-m}`.
    pub fn fit_tail(&self) -> Result<&TailFit, ScatteringError> {
        self.tail
            .get_or_init(|| tail::fit(self, &self.opts.tail))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `r(i kappa)` for `kappa > 0`: direct integration up to
    /// [`DIRECT_KAPPA_T_MAX`], the fitted tail model beyond.
    pub fn reflection_imag_axis(&self, kappa: f64) -> Result<C64, ScatteringError> {
        if self.pulse.support_end() * kappa <= DIRECT_KAPPA_T_MAX {
            return self.reflection(C64::new(0.0, kappa));
        }
        Ok(self.fit_tail()?.eval(kappa))
    }
}

#[cfg(test)]
mod tests;
