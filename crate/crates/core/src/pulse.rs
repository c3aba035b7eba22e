//! Boundary input pulses `E1(t)` injected at `x = 0`.

use std::fmt;

use thiserror::Error;

use crate::numerics::{adaptive_quad_points, NumericsError, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PulseError {
    #[error("pulse amplitude must be nonzero")]
    ZeroAmplitude,
    #[error("support end must be positive and finite, got {0}")]
    InvalidSupport(f64),
    #[error("start exponent must be finite and > 1, got {0}")]
    InvalidExponent(f64),
    #[error(transparent)]
    Quadrature(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseKind {
    /// Identically zero. Only useful as a fixture for the trivial solution.
    Zero,
    /// `A` on `[0, T]`.
    Box,
    /// `c1 t^(m-1) exp(1 - 1/(1 - (t/T)^2))` on `[0, T)`.
    SmoothBump,
    /// `c1 t^(m-1)` on `[0, T]`.
    PowerStart,
}

impl fmt::Display for PulseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PulseKind::Zero => "zero",
            PulseKind::Box => "box",
            PulseKind::SmoothBump => "smooth_bump",
            PulseKind::PowerStart => "power_start",
        };
        f.write_str(s)
    }
}

/// Compactly supported input pulse. Immutable after construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    kind: PulseKind,
    amplitude: C64,
    support_end: f64,
    start_exponent: f64,
}

fn check_support(t_end: f64) -> Result<(), PulseError> {
    if t_end > 0.0 && t_end.is_finite() {
        Ok(())
    } else {
        Err(PulseError::InvalidSupport(t_end))
    }
}

fn check_amplitude(c: C64) -> Result<(), PulseError> {
    if c.norm() > 0.0 && c.re.is_finite() && c.im.is_finite() {
        Ok(())
    } else {
        Err(PulseError::ZeroAmplitude)
    }
}

fn check_exponent(m: f64) -> Result<(), PulseError> {
    if m > 1.0 && m.is_finite() {
        Ok(())
    } else {
        Err(PulseError::InvalidExponent(m))
    }
}

impl Pulse {
    pub fn zero() -> Self {
        Self {
            kind: PulseKind::Zero,
            amplitude: C64::new(0.0, 0.0),
            support_end: 1.0,
            start_exponent: f64::INFINITY,
        }
    }

    pub fn boxcar(amplitude: impl Into<C64>, support_end: f64) -> Result<Self, PulseError> {
        let amplitude = amplitude.into();
        check_amplitude(amplitude)?;
        check_support(support_end)?;
        Ok(Self {
            kind: PulseKind::Box,
            amplitude,
            support_end,
            start_exponent: 1.0,
        })
    }

    pub fn smooth_bump(c1: impl Into<C64>, m: f64, support_end: f64) -> Result<Self, PulseError> {
        let amplitude = c1.into();
        check_amplitude(amplitude)?;
        check_support(support_end)?;
        check_exponent(m)?;
        Ok(Self {
            kind: PulseKind::SmoothBump,
            amplitude,
            support_end,
            start_exponent: m,
        })
    }

    pub fn power_start(c1: impl Into<C64>, m: f64, support_end: f64) -> Result<Self, PulseError> {
        let amplitude = c1.into();
        check_amplitude(amplitude)?;
        check_support(support_end)?;
        check_exponent(m)?;
        Ok(Self {
            kind: PulseKind::PowerStart,
            amplitude,
            support_end,
            start_exponent: m,
        })
    }

    pub fn kind(&self) -> PulseKind {
        self.kind
    }

    pub fn amplitude(&self) -> C64 {
        self.amplitude
    }

    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    /// Exponent `m` in `E1(t) ~ c1 t^(m-1)` as `t -> 0+`; 1 for a box.
    pub fn start_exponent(&self) -> f64 {
        self.start_exponent
    }

    pub fn is_zero(&self) -> bool {
        self.kind == PulseKind::Zero
    }

    /// Same pulse with the amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, PulseError> {
        if self.is_zero() {
            return Ok(*self);
        }
        let amplitude = self.amplitude * factor;
        check_amplitude(amplitude)?;
        Ok(Self { amplitude, ..*self })
    }

    /// `E1(t)`; exactly zero outside `[0, T]`.
    pub fn eval(&self, t: f64) -> C64 {
        let zero = C64::new(0.0, 0.0);
        if !(0.0..=self.support_end).contains(&t) {
            return zero;
        }
        match self.kind {
            PulseKind::Zero => zero,
            PulseKind::Box => self.amplitude,
            PulseKind::PowerStart => self.amplitude * t.powf(self.start_exponent - 1.0),
            PulseKind::SmoothBump => {
                let s = t / self.support_end;
                let d = 1.0 - s * s;
                if d <= 0.0 {
                    return zero;
                }
                self.amplitude * t.powf(self.start_exponent - 1.0) * (1.0 - 1.0 / d).exp()
            }
        }
    }

    /// One-sided limits `(E1(t-), E1(t+))`.
    pub fn limits(&self, t: f64) -> (C64, C64) {
        // eval is continuous inside the support, so it supplies both limits there.
        let zero = C64::new(0.0, 0.0);
        let left = if t > 0.0 && t <= self.support_end { self.eval(t) } else { zero };
        let right = if t >= 0.0 && t < self.support_end { self.eval(t) } else { zero };
        (left, right)
    }

    /// Points where `E1` may jump or lose smoothness.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            PulseKind::Zero => Vec::new(),
            _ => vec![0.0, self.support_end],
        }
    }

    /// `int_0^T (1 + t)|E1(t)| dt`.
    pub fn first_moment(&self, tol: f64) -> Result<f64, PulseError> {
        if self.is_zero() {
            return Ok(0.0);
        }
        let t_end = self.support_end;
        let v = adaptive_quad_points(|t| (1.0 + t) * self.eval(t).norm(), &[0.0, t_end], tol)?;
        Ok(v)
    }
}
