use std::f64::consts::{FRAC_PI_2, PI};

use super::{NumericsError, C64};

/// Axis-aligned rectangle `[re_min, re_max] x [im_min, im_max]` in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        assert!(re_min < re_max && im_min < im_max, "degenerate rectangle");
        Self {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn center(&self) -> C64 {
        C64::new(0.5 * (self.re_min + self.re_max), 0.5 * (self.im_min + self.im_max))
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Corners in counter-clockwise order starting bottom-left.
    pub fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_min, self.im_min),
            C64::new(self.re_max, self.im_min),
            C64::new(self.re_max, self.im_max),
            C64::new(self.re_min, self.im_max),
        ]
    }

    /// Splits into four quadrants at `(re_split, im_split)`.
    pub fn quarter_at(&self, re_split: f64, im_split: f64) -> [Rect; 4] {
        [
            Rect::new(self.re_min, re_split, self.im_min, im_split),
            Rect::new(re_split, self.re_max, self.im_min, im_split),
            Rect::new(re_split, self.re_max, im_split, self.im_max),
            Rect::new(self.re_min, re_split, im_split, self.im_max),
        ]
    }
}

const INITIAL_SEGMENTS_PER_EDGE: usize = 32;
const MAX_BOUNDARY_SAMPLES: usize = 200_000;

/// Number of zeros (with multiplicity) of the analytic `f` inside `rect`.
///
/// The phase of `f` is continued along the boundary; segments are bisected
/// until consecutive samples differ in argument by less than pi/2, so no
/// derivative of `f` is required.
pub fn count_zeros_rect<F: FnMut(C64) -> C64>(mut f: F, rect: &Rect, root_tol: f64) -> Result<i64, NumericsError> {
    let corners = rect.corners();
    let scale = rect.width().max(rect.height());
    let min_len = scale * 1e-13;
    let mut total_phase = 0.0;
    let mut samples = 0usize;

    let mut eval = |z: C64, samples: &mut usize| -> Result<C64, NumericsError> {
        *samples += 1;
        let v = f(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(NumericsError::NonFinite { t: z.re });
        }
        if v.norm() < root_tol {
            return Err(NumericsError::BoundaryZero { at: z, modulus: v.norm() });
        }
        Ok(v)
    };

    for e in 0..4 {
        let (z0, z1) = (corners[e], corners[(e + 1) % 4]);
        let n = INITIAL_SEGMENTS_PER_EDGE;
        let pts: Vec<C64> = (0..=n).map(|i| z0 + (z1 - z0) * (i as f64 / n as f64)).collect();
        let mut vals = Vec::with_capacity(pts.len());
        for &p in &pts {
            vals.push(eval(p, &mut samples)?);
        }
        for i in 0..n {
            // Explicit stack keeps the subdivision iterative.
            let mut stack = vec![(pts[i], vals[i], pts[i + 1], vals[i + 1])];
            while let Some((za, fa, zb, fb)) = stack.pop() {
                let dphi = (fb / fa).arg();
                if dphi.abs() < FRAC_PI_2 {
                    total_phase += dphi;
                    continue;
                }
                if (zb - za).norm() < min_len || samples > MAX_BOUNDARY_SAMPLES {
                    return Err(NumericsError::BoundaryZero {
                        at: 0.5 * (za + zb),
                        modulus: fa.norm().min(fb.norm()),
                    });
                }
                let zm = 0.5 * (za + zb);
                let fm = eval(zm, &mut samples)?;
                // Push the right half first so the left is processed first.
                stack.push((zm, fm, zb, fb));
                stack.push((za, fa, zm, fm));
            }
        }
    }
    let winding = total_phase / (2.0 * PI);
    Ok(winding.round() as i64)
}

const NEWTON_MAX_ITER: usize = 100;

/// Newton iteration on a complex analytic function.
///
/// Converges when `|f(z)| <= tol`; steps are halved while they increase `|f|`.
pub fn complex_newton<F, D>(mut f: F, mut df: D, seed: C64, tol: f64) -> Result<C64, NumericsError>
where
    F: FnMut(C64) -> C64,
    D: FnMut(C64) -> C64,
{
    let mut z = seed;
    let mut fz = f(z);
    for it in 0..NEWTON_MAX_ITER {
        if fz.norm() <= tol {
            log::trace!("newton converged after {it} iterations, |f| = {:e}", fz.norm());
            return Ok(z);
        }
        let d = df(z);
        if d.norm() == 0.0 || !d.re.is_finite() || !d.im.is_finite() {
            break;
        }
        let mut step = fz / d;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = z - step;
            let ft = f(trial);
            if ft.re.is_finite() && ft.im.is_finite() && ft.norm() < fz.norm() {
                z = trial;
                fz = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if fz.norm() <= tol {
        return Ok(z);
    }
    Err(NumericsError::Diverged {
        seed,
        iterations: NEWTON_MAX_ITER,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_linear_zero() {
        let rect = Rect::new(0.0, 2.0, 0.0, 2.0);
        let n = count_zeros_rect(|k| k - C64::new(1.0, 1.0), &rect, 1e-10).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn constant_has_no_zeros() {
        let rect = Rect::new(-5.0, 3.0, 0.1, 4.0);
        assert_eq!(count_zeros_rect(|_| C64::new(1.0, 0.0), &rect, 1e-10).unwrap(), 0);
    }

    #[test]
    fn multiplicity_counts() {
        let rect = Rect::new(-1.0, 1.0, -1.0, 1.0);
        let n = count_zeros_rect(|k| k * k * k * (k - C64::new(5.0, 0.0)), &rect, 1e-10).unwrap();
        assert_eq!(n, 3);
    }

    #[test]
    fn boundary_zero_is_reported() {
        let rect = Rect::new(0.0, 2.0, 0.0, 2.0);
        let r = count_zeros_rect(|k| k - C64::new(1.0, 0.0), &rect, 1e-10);
        assert!(matches!(r, Err(NumericsError::BoundaryZero { .. })));
    }

    #[test]
    fn oscillatory_function() {
        // sin(k) has zeros at multiples of pi; five of them in [-7, 7].
        let rect = Rect::new(-7.0, 7.0, -1.0, 1.3);
        let n = count_zeros_rect(|k| k.sin(), &rect, 1e-10).unwrap();
        assert_eq!(n, 5);
    }

    #[test]
    fn newton_double_root() {
        let z = complex_newton(|k| k * k, |k| 2.0 * k, C64::new(0.1, 0.0), 1e-10).unwrap();
        assert!(z.norm() * z.norm() <= 1e-10);
    }

    #[test]
    fn newton_simple_root() {
        let i = C64::new(0.0, 1.0);
        let z = complex_newton(|k| k - i, |_| C64::new(1.0, 0.0), 2.0 * i, 1e-12).unwrap();
        assert!((z - i).norm() < 1e-12);
    }

    #[test]
    fn newton_without_root_diverges() {
        // Real seeds stay on the real axis, where k^2 + 1 never vanishes.
        let one = C64::new(1.0, 0.0);
        let r = complex_newton(|k| k * k + one, |k| 2.0 * k, C64::new(0.5, 0.0), 1e-10);
        assert!(matches!(r, Err(NumericsError::Diverged { .. })));
    }
}
