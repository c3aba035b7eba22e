//! Shared numerical kernels: adaptive quadrature, complex root finding,
//! zero counting by the argument principle and an adaptive Runge-Kutta
//! integrator for complex linear systems.

mod ode;
mod quad;
mod roots;

pub use ode::{ode_advance, OdeStats, OdeTolerance};
pub use quad::{adaptive_quad, adaptive_quad_points};
pub use roots::{complex_newton, count_zeros_rect, Rect};

use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("quadrature on [{a}, {b}] did not converge (estimated error {error:e})")]
    NonConvergence { a: f64, b: f64, error: f64 },
    #[error("function nearly vanishes on the contour at {at} (|f| = {modulus:e})")]
    BoundaryZero { at: C64, modulus: f64 },
    #[error("Newton iteration diverged from seed {seed} after {iterations} iterations")]
    Diverged { seed: C64, iterations: usize },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite value encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid tolerance {0:e}")]
    InvalidTolerance(f64),
}

/// Global accuracy targets threaded through scattering and asymptotics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub ode_rel: f64,
    pub ode_abs: f64,
    pub quad_tol: f64,
    pub root_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            ode_rel: 1e-10,
            ode_abs: 1e-12,
            quad_tol: 1e-10,
            root_tol: 1e-10,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), NumericsError> {
        for v in [self.ode_rel, self.ode_abs, self.root_tol] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(NumericsError::InvalidTolerance(v));
            }
        }
        if !(self.quad_tol >= 10.0 * f64::EPSILON && self.quad_tol.is_finite()) {
            return Err(NumericsError::InvalidTolerance(self.quad_tol));
        }
        Ok(())
    }

    pub fn ode(&self) -> OdeTolerance {
        OdeTolerance {
            rel: self.ode_rel,
            abs: self.ode_abs,
        }
    }

    /// Multiplies every tolerance by `factor` (the CLI `--tol-scale` knob).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            ode_rel: self.ode_rel * factor,
            ode_abs: self.ode_abs * factor,
            quad_tol: (self.quad_tol * factor).max(10.0 * f64::EPSILON),
            root_tol: self.root_tol * factor,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tolerances_are_valid() {
        Tolerances::default().validate().unwrap();
    }

    #[test]
    fn rejects_tiny_quad_tol() {
        let tol = Tolerances {
            quad_tol: 1e-17,
            ..Default::default()
        };
        assert!(tol.validate().is_err());
        let tol = Tolerances {
            ode_rel: 0.0,
            ..Default::default()
        };
        assert!(tol.validate().is_err());
    }
}
