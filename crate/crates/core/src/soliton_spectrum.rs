//! Zeros of `b` in the upper half-plane, their residue data and soliton
//! velocities.

use rayon::prelude::*;
use thiserror::Error;

use crate::numerics::{complex_newton, count_zeros_rect, NumericsError, Rect, C64};
use crate::scattering::{ScatteringData, ScatteringError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("the pulse is identically zero; it has no scattering data")]
    TrivialPulse,
    #[error("search box must lie in Im k > 0, got im_min = {0}")]
    BoxNotInUpperHalfPlane(f64),
    #[error("assumption on the zeros of b violated: {0}")]
    AssumptionViolated(String),
    #[error("argument principle counts {counted} zeros but {found} were refined")]
    CountMismatch { counted: i64, found: usize },
    #[error("x/t = {ratio} matches solitons {first} and {second}; reduce the matching tolerance")]
    AmbiguousMatch { ratio: f64, first: usize, second: usize },
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// One zero `k_j` of `b` with `gamma_j = 1 / (a(k_j) b'(k_j))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonZero {
    pub k: C64,
    pub gamma: C64,
    pub a: C64,
    pub db: C64,
    pub velocity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonSpectrum {
    /// Sorted by `|k_j|` increasing.
    pub zeros: Vec<SolitonZero>,
    pub search_box: Rect,
}

/// `4|k|^2 / (1 + 4|k|^2)`.
pub fn velocity(k: C64) -> f64 {
    let q = 4.0 * k.norm_sqr();
    q / (1.0 + q)
}

/// Search-box defaults: `[-K, K] x (delta0, K]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub delta0: f64,
    pub k_start: f64,
    pub k_max: f64,
    /// Stop enlarging once `max |b|` on the top and side edges falls below
    /// this fraction of `max |b|` on the bottom edge.
    pub edge_ratio: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            delta0: 1e-4,
            k_start: 4.0,
            k_max: 32.0,
            edge_ratio: 1e-3,
        }
    }
}

const EDGE_SAMPLES: usize = 64;
const MAX_DEPTH: usize = 40;
const SIMPLE_ZERO_FLOOR: f64 = 1e-10;
const MODULUS_GAP: f64 = 1e-6;
const MIN_IMAG: f64 = 1e-8;

fn b_of(sd: &ScatteringData, k: C64) -> C64 {
    sd.ab_coeffs(k).map(|(_, b)| b).unwrap_or(C64::new(f64::NAN, f64::NAN))
}

/// Doubles `K` from `k_start` until the decay criterion holds or `k_max`.
pub fn default_search_box(sd: &ScatteringData, opts: &SearchOptions) -> Rect {
    let mut k = opts.k_start;
    loop {
        let rect = Rect::new(-k, k, opts.delta0, k);
        if k >= opts.k_max {
            return rect;
        }
        let samples = |z0: C64, z1: C64| -> f64 {
            (0..=EDGE_SAMPLES)
                .into_par_iter()
                .map(|i| b_of(sd, z0 + (z1 - z0) * (i as f64 / EDGE_SAMPLES as f64)).norm())
                .reduce(|| 0.0, f64::max)
        };
        let [bl, br, tr, tl] = rect.corners();
        let bottom = samples(bl, br);
        let outer = samples(br, tr).max(samples(tr, tl)).max(samples(tl, bl));
        if outer < opts.edge_ratio * bottom {
            return rect;
        }
        k = (2.0 * k).min(opts.k_max);
    }
}

/// Nudges a rectangle edge set until the boundary is clear of zeros.
fn count_with_perturbation(sd: &ScatteringData, rect: Rect) -> Result<(i64, Rect), SpectrumError> {
    let tol = sd.tolerances().root_tol;
    let mut r = rect;
    for attempt in 0..6 {
        match count_zeros_rect(|k| b_of(sd, k), &r, tol) {
            Ok(n) => return Ok((n, r)),
            Err(NumericsError::BoundaryZero { .. }) if attempt < 5 => {
                let d = 1e-3 * (attempt + 1) as f64 * r.width().max(r.height());
                let im_min = if r.im_min > d { r.im_min - 0.1 * d } else { r.im_min };
                r = Rect::new(r.re_min - d, r.re_max + 0.7 * d, im_min, r.im_max + 0.3 * d);
            }
            Err(e) => return Err(e.into()),
        }
    }
    unreachable!("loop returns on the final attempt")
}

fn count_cell(sd: &ScatteringData, rect: &Rect) -> Result<i64, NumericsError> {
    count_zeros_rect(|k| b_of(sd, k), rect, sd.tolerances().root_tol)
}

fn newton(sd: &ScatteringData, seed: C64) -> Result<C64, SpectrumError> {
    let f = |k: C64| b_of(sd, k);
    let df = |k: C64| {
        sd.ab_with_derivs(k)
            .map(|d| d.db)
            .unwrap_or(C64::new(f64::NAN, f64::NAN))
    };
    Ok(complex_newton(f, df, seed, sd.tolerances().root_tol)?)
}

// Off-center split fractions make it unlikely that a zero sits on a cut.
const SPLITS: [(f64, f64); 3] = [(0.500_731, 0.498_113), (0.471_3, 0.527_9), (0.538_1, 0.461_7)];

fn search_cell(sd: &ScatteringData, rect: Rect, count: i64, depth: usize) -> Result<Vec<C64>, SpectrumError> {
    if count <= 0 {
        return Ok(Vec::new());
    }
    if count == 1 {
        // Newton from the centre; accept only if it lands inside the cell.
        if let Ok(z) = newton(sd, rect.center()) {
            if rect.contains(z) {
                return Ok(vec![z]);
            }
        }
    }
    if depth >= MAX_DEPTH {
        return Err(SpectrumError::AssumptionViolated(format!(
            "{count} zeros could not be separated inside {rect:?} (multiple zero?)"
        )));
    }
    let mut last_err = None;
    for &(fx, fy) in &SPLITS {
        let rs = rect.re_min + fx * rect.width();
        let is = rect.im_min + fy * rect.height();
        let quads = rect.quarter_at(rs, is);
        let counts: Result<Vec<i64>, NumericsError> = quads.par_iter().map(|q| count_cell(sd, q)).collect();
        match counts {
            Ok(cs) => {
                let total: i64 = cs.iter().sum();
                if total != count {
                    last_err = Some(SpectrumError::CountMismatch {
                        counted: count,
                        found: total.max(0) as usize,
                    });
                    continue;
                }
                let parts: Result<Vec<Vec<C64>>, SpectrumError> = quads
                    .par_iter()
                    .zip(cs.par_iter())
                    .map(|(q, &c)| search_cell(sd, *q, c, depth + 1))
                    .collect();
                return Ok(parts?.into_iter().flatten().collect());
            }
            Err(NumericsError::BoundaryZero { .. }) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(last_err.unwrap_or_else(|| {
        SpectrumError::AssumptionViolated(format!("zeros on every trial cut of {rect:?}"))
    }))
}

/// All zeros of `b` in `search_box` with residue data, after checking
/// simplicity, distinct moduli and separation from the real axis.
pub fn find_zeros(sd: &ScatteringData, search_box: Rect) -> Result<SolitonSpectrum, SpectrumError> {
    if sd.pulse().is_zero() {
        return Err(SpectrumError::TrivialPulse);
    }
    if search_box.im_min <= 0.0 {
        return Err(SpectrumError::BoxNotInUpperHalfPlane(search_box.im_min));
    }
    let (count, rect) = count_with_perturbation(sd, search_box)?;
    log::debug!("argument principle: {count} zeros of b in {rect:?}");
    let roots = search_cell(sd, rect, count, 0)?;
    if roots.len() as i64 != count {
        return Err(SpectrumError::CountMismatch {
            counted: count,
            found: roots.len(),
        });
    }
    let mut zeros: Vec<SolitonZero> = roots
        .par_iter()
        .map(|&k| {
            let d = sd.ab_with_derivs(k)?;
            Ok(SolitonZero {
                k,
                gamma: 1.0 / (d.a * d.db),
                a: d.a,
                db: d.db,
                velocity: velocity(k),
            })
        })
        .collect::<Result<_, ScatteringError>>()?;
    zeros.sort_by(|p, q| p.k.norm().total_cmp(&q.k.norm()));
    check_assumptions(&zeros)?;
    Ok(SolitonSpectrum {
        zeros,
        search_box: rect,
    })
}

fn check_assumptions(zeros: &[SolitonZero]) -> Result<(), SpectrumError> {
    for (j, z) in zeros.iter().enumerate() {
        if z.db.norm() <= SIMPLE_ZERO_FLOOR {
            return Err(SpectrumError::AssumptionViolated(format!(
                "zero {} at {} is not simple (|b'| = {:e})",
                j + 1,
                z.k,
                z.db.norm()
            )));
        }
        if z.k.im <= MIN_IMAG {
            return Err(SpectrumError::AssumptionViolated(format!("zero {} at {} lies on the real line", j + 1, z.k)));
        }
        if !(z.gamma.re.is_finite() && z.gamma.im.is_finite()) || z.gamma.norm() == 0.0 {
            return Err(SpectrumError::AssumptionViolated(format!("residue of zero {} is not finite", j + 1)));
        }
    }
    for (j, w) in zeros.windows(2).enumerate() {
        let (m0, m1) = (w[0].k.norm(), w[1].k.norm());
        if (m1 - m0) <= MODULUS_GAP * m1 {
            return Err(SpectrumError::AssumptionViolated(format!(
                "zeros {} and {} have equal moduli {m0} and {m1}",
                j + 1,
                j + 2
            )));
        }
    }
    Ok(())
}

impl SolitonSpectrum {
    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    /// Half the smallest gap between distinct velocities, or 0.02 for at
    /// most one soliton.
    pub fn default_match_eps(&self) -> f64 {
        let mut v: Vec<f64> = self.zeros.iter().map(|z| z.velocity).collect();
        v.sort_by(f64::total_cmp);
        v.windows(2)
            .map(|w| 0.5 * (w[1] - w[0]))
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))))
            .unwrap_or(0.02)
    }

    /// Index `j` (0-based) with `|x/t - v_j| < eps`, if any.
    pub fn velocity_match(&self, t: f64, x: f64, eps: f64) -> Result<Option<usize>, SpectrumError> {
        let ratio = x / t;
        let mut hit: Option<usize> = None;
        for (j, z) in self.zeros.iter().enumerate() {
            if (ratio - z.velocity).abs() < eps {
                if let Some(first) = hit {
                    return Err(SpectrumError::AmbiguousMatch { ratio, first, second: j });
                }
                hit = Some(j);
            }
        }
        Ok(hit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::Pulse;
    use std::f64::consts::PI;

    fn box_zero(amp: f64, t_end: f64, n: u32) -> f64 {
        (amp * amp / 4.0 - (n as f64 * PI / t_end).powi(2)).sqrt()
    }

    #[test]
    fn velocity_values() {
        let k = C64::new(0.0, 1.944888);
        assert!((velocity(k) - 0.937_99).abs() < 1e-4);
        assert!(velocity(C64::new(0.0, 1e-3)) > 0.0 && velocity(C64::new(50.0, 50.0)) < 1.0);
    }

    #[test]
    fn trivial_pulse_rejected() {
        let sd = ScatteringData::with_defaults(Pulse::zero());
        let r = find_zeros(&sd, Rect::new(-1.0, 1.0, 0.1, 1.0));
        assert_eq!(r, Err(SpectrumError::TrivialPulse));
    }

    #[test]
    fn box_single_zero() {
        let sd = ScatteringData::with_defaults(Pulse::boxcar(5.0, 2.0).unwrap());
        let spec = find_zeros(&sd, Rect::new(-3.0, 3.0, 1e-4, 3.0)).unwrap();
        assert_eq!(spec.len(), 1);
        let z = spec.zeros[0];
        assert!((z.k - C64::new(0.0, box_zero(5.0, 2.0, 1))).norm() < 1e-8);
        assert!(z.gamma.norm() > 0.0 && z.gamma.re.is_finite());
        assert_eq!(spec.velocity_match(1000.0, 938.0, 0.01).unwrap(), Some(0));
        assert_eq!(spec.velocity_match(1000.0, 500.0, 0.01).unwrap(), None);
        assert!((spec.default_match_eps() - 0.02).abs() < 1e-15);
    }

    #[test]
    fn box_two_zeros() {
        let sd = ScatteringData::with_defaults(Pulse::boxcar(7.0, 2.0).unwrap());
        let spec = find_zeros(&sd, Rect::new(-4.0, 4.0, 1e-4, 4.0)).unwrap();
        assert_eq!(spec.len(), 2);
        assert!((spec.zeros[0].k.im - box_zero(7.0, 2.0, 2)).abs() < 1e-8);
        assert!((spec.zeros[1].k.im - box_zero(7.0, 2.0, 1)).abs() < 1e-8);
        let eps = spec.default_match_eps();
        assert!(eps > 0.0 && eps < 0.1);
        assert!(spec.velocity_match(1.0, spec.zeros[1].velocity, eps).unwrap() == Some(1));
        assert!(matches!(
            spec.velocity_match(1.0, spec.zeros[1].velocity, 1.0),
            Err(SpectrumError::AmbiguousMatch { .. })
        ));
    }

    #[test]
    fn small_box_has_no_solitons() {
        // A T < 2 pi: no imaginary zeros.
        let sd = ScatteringData::with_defaults(Pulse::boxcar(1.0, 1.0).unwrap());
        let spec = find_zeros(&sd, Rect::new(-4.0, 4.0, 1e-4, 4.0)).unwrap();
        assert!(spec.is_empty());
        assert_eq!(spec.velocity_match(2.0, 1.0, 0.02).unwrap(), None);
    }

    #[test]
    fn default_box_is_reported() {
        let sd = ScatteringData::with_defaults(Pulse::smooth_bump(3.0, 2.0, 2.0).unwrap());
        let rect = default_search_box(&sd, &SearchOptions::default());
        assert!(rect.im_min == 1e-4 && rect.re_max >= 4.0 && rect.re_max <= 32.0);
    }
}
