use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::numerics::C64;

use super::{ScatteringData, ScatteringError, DIRECT_KAPPA_T_MAX};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFitOptions {
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub samples: usize,
    /// Largest accepted RMS residual of the log-linear fit (modulus and phase).
    pub max_residual: f64,
}

impl Default for TailFitOptions {
    fn default() -> Self {
        Self {
            kappa_min: 20.0,
            kappa_max: 200.0,
            samples: 16,
            max_residual: 0.05,
        }
    }
}

/// `r(i kappa) ~ c (i kappa)^{-m}` measured on `[kappa_min, kappa_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailFit {
    pub m: f64,
    pub c: C64,
    pub residual: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
}

impl TailFit {
    pub fn eval(&self, kappa: f64) -> C64 {
        self.c * C64::from_polar(kappa.powf(-self.m), -self.m * FRAC_PI_2)
    }
}

pub(super) fn fit(sd: &ScatteringData, opts: &TailFitOptions) -> Result<TailFit, ScatteringError> {
    if sd.pulse().is_zero() {
        return Err(ScatteringError::TrivialPulse);
    }
    let k_hi = opts.kappa_max.min(DIRECT_KAPPA_T_MAX / sd.pulse().support_end());
    let k_lo = opts.kappa_min.min(0.5 * k_hi);
    let n = opts.samples.max(3);
    let kappas: Vec<f64> = (0..n)
        .map(|i| (k_lo.ln() + (k_hi / k_lo).ln() * i as f64 / (n - 1) as f64).exp())
        .collect();
    let rs: Vec<C64> = kappas
        .par_iter()
        .map(|&kp| sd.reflection(C64::new(0.0, kp)))
        .collect::<Result<_, _>>()?;

    let xs: Vec<f64> = kappas.iter().map(|k| k.ln()).collect();
    let ys: Vec<f64> = rs.iter().map(|r| r.norm().ln()).collect();
    let nf = n as f64;
    let xm = xs.iter().sum::<f64>() / nf;
    let ym = ys.iter().sum::<f64>() / nf;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let m = -slope;

    // Phase of c = r (i kappa)^m, averaged on the unit circle.
    let phasors: Vec<C64> = rs.iter().map(|r| C64::from_polar(1.0, r.arg() + m * FRAC_PI_2)).collect();
    let mean: C64 = phasors.iter().sum::<C64>() / nf;
    let phase = mean.arg();
    let c = C64::from_polar(intercept.exp(), phase);

    let mod_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / nf;
    let ph_res: f64 = phasors.iter().map(|p| (p / mean.unscale(mean.norm())).arg().powi(2)).sum::<f64>() / nf;
    let residual = (mod_res + ph_res).sqrt();
    log::debug!("tail fit: m = {m:.6}, C = {c:.6e}, residual = {residual:.3e}");
    if !(residual <= opts.max_residual && m.is_finite()) {
        return Err(ScatteringError::FitRejected { m, residual });
    }
    Ok(TailFit {
        m,
        c,
        residual,
        kappa_min: k_lo,
        kappa_max: k_hi,
    })
}
