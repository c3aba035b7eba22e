//! Direct integration of the sharp-line Maxwell-Bloch system
//! `E_t + E_x = rho`, `rho_t = N E`, `N_t = -Re(conj(E) rho)` on the quarter
//! plane with trivial initial data and `E(t, 0) = E1(t)`.
//!
//! The grid has `dt = dx = h`, so characteristics run along grid diagonals.
//! It is swept column by column in `x`; in characteristic coordinates
//! `(s, x)`, `s = t - x`, each column needs only its predecessor. Stored `E`
//! values are left limits in `s`; where the pulse jumps, the right limit is
//! recovered from the known jump, which is carried unchanged along its
//! characteristic.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::field::FieldTriple;
use crate::numerics::C64;
use crate::pulse::Pulse;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("grid preconditions violated: {0}")]
    CflViolation(String),
    #[error("Bloch-sphere defect {defect:e} at (t, x) = ({t}, {x}) exceeds 1e-4")]
    NonPhysical { defect: f64, t: f64, x: f64 },
    #[error("(t, x) = ({t}, {x}) lies outside the grid")]
    OutOfDomain { t: f64, x: f64 },
    #[error("{nodes} nodes exceed the storage cap of {cap}; use the column or report-only runs")]
    TooLarge { nodes: u64, cap: u64 },
    #[error("malformed grid file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Guard on `|N^2 + |rho|^2 - 1|`.
pub const NONPHYSICAL_DEFECT: f64 = 1e-4;
/// Largest grid kept in memory by [`simulate`].
pub const MAX_STORED_NODES: u64 = 16_000_000;

/// Largest admissible spacing for `p`.
pub fn max_spacing(p: &Pulse) -> f64 {
    0.02 * p.support_end().min(1.0)
}

fn steps(extent: f64, h: f64, name: &str) -> Result<usize, OracleError> {
    let n = (extent / h).round();
    if !(n >= 1.0 && (n * h - extent).abs() <= 1e-9 * extent.max(h)) {
        return Err(OracleError::CflViolation(format!("{name} = {extent} is not a multiple of h = {h}")));
    }
    Ok(n as usize)
}

fn check_spacing(p: &Pulse, h: f64) -> Result<(), OracleError> {
    let h_max = max_spacing(p);
    if !(h > 0.0 && h <= h_max * (1.0 + 1e-12)) {
        return Err(OracleError::CflViolation(format!("h = {h} must lie in (0, {h_max}]")));
    }
    Ok(())
}

/// `E1(s-) - E1(s+)` at `s = k h`, `k = 0..=n`.
fn jumps(p: &Pulse, h: f64, n: usize) -> Vec<C64> {
    let mut j = vec![C64::new(0.0, 0.0); n + 1];
    for bp in p.breakpoints() {
        let k = (bp / h).round();
        if k >= 0.0 && (k as usize) <= n && (k * h - bp).abs() <= 1e-9 * h {
            let (l, r) = p.limits(bp);
            j[k as usize] = l - r;
        }
    }
    j
}

/// Breakpoints off the grid lower the order at their characteristic.
fn warn_misaligned(p: &Pulse, h: f64) {
    for bp in p.breakpoints() {
        let (l, r) = p.limits(bp);
        if l != r && ((bp / h).round() * h - bp).abs() > 1e-9 * h {
            log::warn!("pulse jump at t = {bp} is not on the grid (h = {h}); accuracy drops to first order");
        }
    }
}

/// Bloch rotation over one step with the trapezoid-averaged field. The
/// update is the Cayley transform of the generator, so `N^2 + |rho|^2` is
/// carried over up to rounding.
#[inline]
fn material(h: f64, rho0: C64, n0: f64, e0: C64, e1: C64) -> (C64, f64) {
    let e = 0.5 * (e0 + e1);
    // Rotation vector h/2 * (-Im E, Re E, 0) acting on (Re rho, Im rho, N).
    let (wa, wb) = (-0.5 * h * e.im, 0.5 * h * e.re);
    let v = [rho0.re, rho0.im, n0];
    let c1 = [wb * v[2], -wa * v[2], wa * v[1] - wb * v[0]];
    let c2 = [wb * c1[2], -wa * c1[2], wa * c1[1] - wb * c1[0]];
    let f = 2.0 / (1.0 + wa * wa + wb * wb);
    let out = [0, 1, 2].map(|i| v[i] + f * (c1[i] + c2[i]));
    (C64::new(out[0], out[1]), out[2])
}

/// One interior node: characteristic predecessor `diag`, same-`x`
/// predecessor `old` whose field is `e_start` on the side facing the step.
#[inline]
fn interior(h: f64, diag: &FieldTriple, old: &FieldTriple, e_start: C64) -> FieldTriple {
    let half = 0.5 * h;
    // Predictor with the field frozen at the start, then the characteristic update.
    let (rho_p, _) = material(h, old.rho, old.n, e_start, e_start);
    let e1 = diag.e + half * (diag.rho + rho_p);
    let (rho_c, _) = material(h, old.rho, old.n, e_start, e1);
    // One fixed-point sweep couples E and (rho, N).
    let e2 = diag.e + half * (diag.rho + rho_c);
    let (rho, n) = material(h, old.rho, old.n, e_start, e2);
    let e = diag.e + half * (diag.rho + rho);
    FieldTriple { e, n, rho }
}

/// A node on `x = 0`, where `E` is prescribed.
#[inline]
fn boundary(h: f64, old: &FieldTriple, e_start: C64, e_end: C64) -> FieldTriple {
    let (rho, n) = material(h, old.rho, old.n, e_start, e_end);
    FieldTriple { e: e_end, n, rho }
}

/// Scalar maxima over all nodes of a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InvariantReport {
    /// `max |N^2 + |rho|^2 - 1|`.
    pub max_conservation_defect: f64,
    /// Largest deviation from `(0, 1, 0)` on nodes with `x >= t`.
    pub max_causality_defect: f64,
    /// `max |E(t, 0) - E1(t-)|`.
    pub boundary_error: f64,
    pub nodes: u64,
}

impl InvariantReport {
    fn absorb(&mut self, f: &FieldTriple, s_index: isize) {
        let d = f.bloch_defect().abs();
        if d > self.max_conservation_defect || d.is_nan() {
            self.max_conservation_defect = d;
        }
        if s_index <= 0 {
            self.max_causality_defect = self.max_causality_defect.max(f.distance_from_trivial());
        }
        self.nodes += 1;
    }

    fn guard(&self, t: f64, x: f64) -> Result<(), OracleError> {
        let d = self.max_conservation_defect;
        if !(d <= NONPHYSICAL_DEFECT) {
            return Err(OracleError::NonPhysical { defect: d, t, x });
        }
        Ok(())
    }
}

/// Column `x = 0` indexed by `t`-index `0..=nt`.
fn boundary_column(p: &Pulse, h: f64, nt: usize, report: &mut InvariantReport) -> Vec<FieldTriple> {
    let mut col = Vec::with_capacity(nt + 1);
    let first = FieldTriple {
        e: p.limits(0.0).0,
        ..FieldTriple::trivial()
    };
    report.absorb(&first, 0);
    col.push(first);
    for i in 1..=nt {
        let (t0, t1) = ((i - 1) as f64 * h, i as f64 * h);
        let node = boundary(h, &col[i - 1], p.limits(t0).1, p.limits(t1).0);
        report.boundary_error = report.boundary_error.max((node.e - p.limits(t1).0).norm());
        report.absorb(&node, i as isize);
        col.push(node);
    }
    col
}

/// Full sweep over `[0, t_max] x [0, x_max]`. `visit(j, column)` receives
/// column `j` indexed by the `t`-index; nodes with `x > t` are computed by
/// the same stencil from the initial data.
fn sweep_full<F>(p: &Pulse, h: f64, nt: usize, nx: usize, mut visit: F) -> Result<InvariantReport, OracleError>
where
    F: FnMut(usize, &[FieldTriple]),
{
    warn_misaligned(p, h);
    let jump = jumps(p, h, nt);
    let mut report = InvariantReport::default();
    let mut prev = boundary_column(p, h, nt, &mut report);
    report.guard(nt as f64 * h, 0.0)?;
    visit(0, &prev);
    let mut cur = vec![FieldTriple::trivial(); nt + 1];
    for j in 1..=nx {
        cur[0] = FieldTriple::trivial();
        report.absorb(&cur[0], -(j as isize));
        for i in 1..=nt {
            let k = i as isize - j as isize;
            let old = cur[i - 1];
            let e_start = if k >= 1 { old.e - jump[(k - 1) as usize] } else { old.e };
            let node = interior(h, &prev[i - 1], &old, e_start);
            report.absorb(&node, k);
            cur[i] = node;
        }
        report.guard(nt as f64 * h, j as f64 * h)?;
        visit(j, &cur);
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(report)
}

/// Sweep of the band `0 <= s <= s_max`, `0 <= x <= x_max`; columns are
/// indexed by the `s`-index `0..=ns`. The state below the cone is taken as
/// trivial, which [`sweep_full`] verifies.
fn sweep_band<F>(p: &Pulse, h: f64, ns: usize, nx: usize, mut visit: F) -> Result<InvariantReport, OracleError>
where
    F: FnMut(usize, &[FieldTriple]),
{
    warn_misaligned(p, h);
    let jump = jumps(p, h, ns);
    let mut report = InvariantReport::default();
    let mut prev = boundary_column(p, h, ns, &mut report);
    report.guard(ns as f64 * h, 0.0)?;
    visit(0, &prev);
    let mut cur = vec![FieldTriple::trivial(); ns + 1];
    let below = FieldTriple::trivial();
    for j in 1..=nx {
        cur[0] = interior(h, &prev[0], &below, below.e);
        report.absorb(&cur[0], 0);
        for k in 1..=ns {
            let old = cur[k - 1];
            let node = interior(h, &prev[k], &old, old.e - jump[k - 1]);
            report.absorb(&node, k as isize);
            cur[k] = node;
        }
        report.guard(ns as f64 * h, j as f64 * h)?;
        visit(j, &cur);
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(report)
}

/// Extents of a full run, validated against the grid preconditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub h: f64,
    pub t_max: f64,
    pub x_max: f64,
    pub nt: usize,
    pub nx: usize,
}

impl GridSpec {
    pub fn new(p: &Pulse, t_max: f64, x_max: f64, h: f64) -> Result<Self, OracleError> {
        check_spacing(p, h)?;
        for (name, v) in [("t_max", t_max), ("x_max", x_max)] {
            if v > 1e4 * h * (1.0 + 1e-12) {
                return Err(OracleError::CflViolation(format!("{name} = {v} exceeds 1e4 h = {}", 1e4 * h)));
            }
        }
        Ok(Self {
            h,
            t_max,
            x_max,
            nt: steps(t_max, h, "t_max")?,
            nx: steps(x_max, h, "x_max")?,
        })
    }

    pub fn nodes(&self) -> u64 {
        (self.nt as u64 + 1) * (self.nx as u64 + 1)
    }
}

/// Stored solution on the full grid, row-major in `(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimGrid {
    pub spec: GridSpec,
    /// Pulse discontinuities `(s, E1(s-) - E1(s+))`, including the front.
    jumps: Vec<(f64, C64)>,
    data: Vec<FieldTriple>,
}

/// Runs the scheme and keeps every node.
pub fn simulate(p: &Pulse, t_max: f64, x_max: f64, h: f64) -> Result<SimGrid, OracleError> {
    let spec = GridSpec::new(p, t_max, x_max, h)?;
    if spec.nodes() > MAX_STORED_NODES {
        return Err(OracleError::TooLarge {
            nodes: spec.nodes(),
            cap: MAX_STORED_NODES,
        });
    }
    let (nt, nx) = (spec.nt, spec.nx);
    let mut data = vec![FieldTriple::trivial(); (nt + 1) * (nx + 1)];
    sweep_full(p, h, nt, nx, |j, col| {
        for (i, f) in col.iter().enumerate() {
            data[i * (nx + 1) + j] = *f;
        }
    })?;
    Ok(SimGrid {
        spec,
        jumps: grid_jumps(p, h, nt),
        data,
    })
}

/// Runs the scheme without storage and returns its invariants.
pub fn simulate_report(p: &Pulse, t_max: f64, x_max: f64, h: f64) -> Result<InvariantReport, OracleError> {
    let spec = GridSpec::new(p, t_max, x_max, h)?;
    sweep_full(p, h, spec.nt, spec.nx, |_, _| {})
}

fn grid_jumps(p: &Pulse, h: f64, n: usize) -> Vec<(f64, C64)> {
    jumps(p, h, n)
        .into_iter()
        .enumerate()
        .filter(|(_, j)| j.norm() > 0.0)
        .map(|(k, j)| (k as f64 * h, j))
        .collect()
}

/// `max |N^2 + |rho|^2 - 1|`, causality and boundary defects of a stored grid.
pub fn check_invariants(grid: &SimGrid, p: &Pulse) -> InvariantReport {
    let GridSpec { h, nt, nx, .. } = grid.spec;
    let mut report = InvariantReport::default();
    for i in 0..=nt {
        for j in 0..=nx {
            report.absorb(grid.node(i, j), i as isize - j as isize);
        }
        let t = i as f64 * h;
        report.boundary_error = report.boundary_error.max((grid.node(i, 0).e - p.limits(t).0).norm());
    }
    report
}

/// Lagrange weights of the nodes `xs` at `x`.
fn lagrange(xs: &[f64], x: f64) -> Vec<f64> {
    xs.iter()
        .enumerate()
        .map(|(a, &xa)| {
            xs.iter()
                .enumerate()
                .filter(|&(b, _)| b != a)
                .map(|(_, &xb)| (x - xb) / (xa - xb))
                .product()
        })
        .collect()
}

/// Up to four consecutive node indices in `[lo, hi]` around `u`.
fn stencil(u: f64, lo: isize, hi: isize) -> Vec<isize> {
    let n = (hi - lo + 1).clamp(0, 4);
    let start = ((u.floor() as isize) - 1).clamp(lo, hi + 1 - n);
    (start..start + n).collect()
}

/// Stencil in `s` inside the segment between discontinuity lines that
/// contains `s`. The node on the segment's lower edge stores the wrong
/// one-sided limit and is excluded.
fn s_stencil(jumps: &[(f64, C64)], s: f64, h: f64, k_max: isize) -> Vec<isize> {
    let mut lo_s = 0.0;
    let mut hi_s = f64::INFINITY;
    for &(d, _) in jumps {
        if d < s && d >= lo_s {
            lo_s = d;
        }
        if d >= s && d < hi_s {
            hi_s = d;
        }
    }
    let k_lo = (lo_s / h).round() as isize + 1;
    let k_hi = if hi_s.is_finite() { ((hi_s / h).round() as isize).min(k_max) } else { k_max };
    stencil(s / h, k_lo, k_hi)
}

impl SimGrid {
    pub fn node(&self, i: usize, j: usize) -> &FieldTriple {
        &self.data[i * (self.spec.nx + 1) + j]
    }

    pub fn data(&self) -> &[FieldTriple] {
        &self.data
    }

    /// Value at `(t, x)`: cubic Lagrange interpolation in `(s, x)` on nodes
    /// from the same side of every discontinuity line `s = const`.
    pub fn probe(&self, t: f64, x: f64) -> Result<FieldTriple, OracleError> {
        let GridSpec { h, t_max, x_max, nt, nx } = self.spec;
        let slack = 1e-9 * h;
        if !(t >= -slack && t <= t_max + slack && x >= -slack && x <= x_max + slack) {
            return Err(OracleError::OutOfDomain { t, x });
        }
        let s = t - x;
        if s <= 0.0 {
            return Ok(FieldTriple::trivial());
        }
        let js = stencil(x / h, 0, nx as isize);
        let xw = lagrange(&js.iter().map(|&j| j as f64 * h).collect::<Vec<_>>(), x);
        let mut out = FieldTriple::new(C64::new(0.0, 0.0), 0.0, C64::new(0.0, 0.0));
        for (&j, &wx) in js.iter().zip(&xw) {
            // Each column has its own top row `t = t_max`.
            let ks = s_stencil(&self.jumps, s, h, nt as isize - j);
            if ks.is_empty() {
                return Err(OracleError::OutOfDomain { t, x });
            }
            let sw = lagrange(&ks.iter().map(|&k| k as f64 * h).collect::<Vec<_>>(), s);
            for (&k, &ws) in ks.iter().zip(&sw) {
                let f = self.node((k + j) as usize, j as usize);
                let w = ws * wx;
                out.e += f.e * w;
                out.n += f.n * w;
                out.rho += f.rho * w;
            }
        }
        Ok(out)
    }

    /// Little-endian binary: `h, t_max, x_max` (f64), node count (u64), then
    /// `E_re, E_im, N, rho_re, rho_im` per node, row-major in `(t, x)`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), OracleError> {
        for v in [self.spec.h, self.spec.t_max, self.spec.x_max] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(self.data.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(40 * 4096);
        for chunk in self.data.chunks(4096) {
            buf.clear();
            for f in chunk {
                for v in [f.e.re, f.e.im, f.n, f.rho.re, f.rho.im] {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    /// Inverse of [`SimGrid::write_to`]; the pulse supplies the discontinuity
    /// lines used by [`SimGrid::probe`].
    pub fn read_from<R: Read>(mut r: R, p: &Pulse) -> Result<Self, OracleError> {
        let mut b8 = [0u8; 8];
        let mut f64_next = |r: &mut R| -> Result<f64, OracleError> {
            r.read_exact(&mut b8)?;
            Ok(f64::from_le_bytes(b8))
        };
        let h = f64_next(&mut r)?;
        let t_max = f64_next(&mut r)?;
        let x_max = f64_next(&mut r)?;
        let mut b = [0u8; 8];
        r.read_exact(&mut b)?;
        let count = u64::from_le_bytes(b);
        let spec = GridSpec {
            h,
            t_max,
            x_max,
            nt: steps(t_max, h, "t_max").map_err(|e| OracleError::Format(e.to_string()))?,
            nx: steps(x_max, h, "x_max").map_err(|e| OracleError::Format(e.to_string()))?,
        };
        if spec.nodes() != count || count > MAX_STORED_NODES {
            return Err(OracleError::Format(format!("node count {count} does not match a {} grid", spec.nodes())));
        }
        let mut raw = vec![0u8; count as usize * 40];
        r.read_exact(&mut raw)?;
        let data = raw
            .chunks_exact(40)
            .map(|c| {
                let v = |q: usize| f64::from_le_bytes(c[8 * q..8 * q + 8].try_into().expect("8-byte slice"));
                FieldTriple::new(C64::new(v(0), v(1)), v(2), C64::new(v(3), v(4)))
            })
            .collect();
        Ok(Self {
            spec,
            jumps: grid_jumps(p, h, spec.nt),
            data,
        })
    }
}

/// Selected columns `x = j h` over the band `0 <= s <= s_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSet {
    pub h: f64,
    pub s_max: f64,
    jumps: Vec<(f64, C64)>,
    columns: BTreeMap<usize, Vec<FieldTriple>>,
}

/// Band run keeping the columns nearest to `keep_x`. Memory scales with
/// `s_max / h`, so `x_max` is not capped; the spacing bound still applies.
pub fn simulate_columns(
    p: &Pulse,
    s_max: f64,
    x_max: f64,
    h: f64,
    keep_x: &[f64],
) -> Result<(ColumnSet, InvariantReport), OracleError> {
    check_spacing(p, h)?;
    let ns = steps(s_max, h, "s_max")?;
    let nx = steps(x_max, h, "x_max")?;
    let mut wanted: BTreeMap<usize, Vec<FieldTriple>> = BTreeMap::new();
    for &x in keep_x {
        if !(0.0..=x_max).contains(&x) {
            return Err(OracleError::OutOfDomain { t: f64::NAN, x });
        }
        wanted.insert((x / h).round() as usize, Vec::new());
    }
    let report = sweep_band(p, h, ns, nx, |j, col| {
        if let Some(slot) = wanted.get_mut(&j) {
            *slot = col.to_vec();
        }
    })?;
    Ok((
        ColumnSet {
            h,
            s_max,
            jumps: grid_jumps(p, h, ns),
            columns: wanted,
        },
        report,
    ))
}

impl ColumnSet {
    /// Stored column nearest to `x` as `(x_j, values by s-index)`.
    pub fn column(&self, x: f64) -> Option<(f64, &[FieldTriple])> {
        let j = (x / self.h).round() as usize;
        self.columns.get(&j).map(|c| (j as f64 * self.h, c.as_slice()))
    }

    pub fn xs(&self) -> Vec<f64> {
        self.columns.keys().map(|&j| j as f64 * self.h).collect()
    }

    /// Cubic interpolation in `s` on the stored column at `x`; the column
    /// must lie on the grid within `h / 1000`.
    pub fn probe(&self, s: f64, x: f64) -> Result<FieldTriple, OracleError> {
        let (xj, col) = self.column(x).ok_or(OracleError::OutOfDomain { t: s + x, x })?;
        if (xj - x).abs() > 1e-3 * self.h || s > self.s_max + 1e-9 * self.h {
            return Err(OracleError::OutOfDomain { t: s + x, x });
        }
        if s <= 0.0 {
            return Ok(FieldTriple::trivial());
        }
        let ks = s_stencil(&self.jumps, s, self.h, col.len() as isize - 1);
        let w = lagrange(&ks.iter().map(|&k| k as f64 * self.h).collect::<Vec<_>>(), s);
        let mut out = FieldTriple::new(C64::new(0.0, 0.0), 0.0, C64::new(0.0, 0.0));
        for (&k, &wk) in ks.iter().zip(&w) {
            let f = &col[k as usize];
            out.e += f.e * wk;
            out.n += f.n * wk;
            out.rho += f.rho * wk;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests;
