//! Real-line table of `a`, `b` and their k-derivatives with piecewise cubic
//! Hermite interpolation.

use rayon::prelude::*;

use crate::numerics::{OdeTolerance, C64};
use crate::pulse::Pulse;

use super::jost::column2_with_derivative;
use super::ScatteringError;

const INITIAL_SPACING: f64 = 0.05;
const MAX_ROUNDS: usize = 30;

#[derive(Debug, Clone, Copy)]
struct Node {
    k: f64,
    b: C64,
    a: C64,
    db: C64,
    da: C64,
}

fn node(p: &Pulse, k: f64, tol: &OdeTolerance) -> Result<Node, ScatteringError> {
    let [b, a, db, da] = column2_with_derivative(p, C64::new(k, 0.0), tol)?;
    Ok(Node { k, b, a, db, da })
}

fn hermite(k0: f64, f0: C64, d0: C64, k1: f64, f1: C64, d1: C64, k: f64) -> C64 {
    let h = k1 - k0;
    let s = (k - k0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    f0 * h00 + d0 * (h10 * h) + f1 * h01 + d1 * (h11 * h)
}

/// Refined grid on `[-extent, extent]`; read-only once built.
#[derive(Debug, Clone)]
pub struct RealLineCache {
    nodes: Vec<Node>,
    extent: f64,
    real_zeros: Vec<f64>,
}

impl RealLineCache {
    /// Samples `[-extent, extent]` and bisects every interval whose midpoint
    /// interpolant misses the computed value by more than `interp_tol`.
    pub fn build(p: &Pulse, extent: f64, interp_tol: f64, tol: &OdeTolerance) -> Result<Self, ScatteringError> {
        let n = ((2.0 * extent / INITIAL_SPACING).ceil() as usize).max(2);
        let ks: Vec<f64> = (0..=n).map(|i| -extent + 2.0 * extent * i as f64 / n as f64).collect();
        let mut nodes: Vec<Node> = ks.par_iter().map(|&k| node(p, k, tol)).collect::<Result<_, _>>()?;

        let mut pending: Vec<usize> = (0..nodes.len() - 1).collect();
        for _ in 0..MAX_ROUNDS {
            if pending.is_empty() {
                break;
            }
            let mids: Vec<Node> = pending
                .par_iter()
                .map(|&i| node(p, 0.5 * (nodes[i].k + nodes[i + 1].k), tol))
                .collect::<Result<_, _>>()?;
            let mut next = Vec::with_capacity(nodes.len() + mids.len());
            let mut flagged = Vec::new();
            let mut it = pending.iter().zip(mids).peekable();
            for (i, nd) in nodes.iter().enumerate() {
                next.push(*nd);
                if let Some(&(&j, mid)) = it.peek() {
                    if j == i {
                        let (l, r) = (nodes[i], nodes[i + 1]);
                        let eb = (hermite(l.k, l.b, l.db, r.k, r.b, r.db, mid.k) - mid.b).norm();
                        let ea = (hermite(l.k, l.a, l.da, r.k, r.a, r.da, mid.k) - mid.a).norm();
                        if eb.max(ea) > interp_tol {
                            // Both halves of a failing interval are re-examined.
                            flagged.push(next.len() - 1);
                            flagged.push(next.len());
                        }
                        next.push(mid);
                        it.next();
                    }
                }
            }
            nodes = next;
            pending = flagged;
        }
        let real_zeros = find_real_zeros(p, &nodes, tol);
        Ok(Self { nodes, extent, real_zeros })
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, k: f64) -> bool {
        k >= -self.extent && k <= self.extent
    }

    /// Real zeros of `b` inside the table range, ascending.
    pub fn real_zeros(&self) -> &[f64] {
        &self.real_zeros
    }

    /// Interpolated `(a, b)` at real `k` inside the table.
    pub fn ab(&self, k: f64) -> Option<(C64, C64)> {
        if !self.contains(k) {
            return None;
        }
        let idx = self.nodes.partition_point(|n| n.k <= k);
        let i = idx.clamp(1, self.nodes.len() - 1) - 1;
        let (l, r) = (self.nodes[i], self.nodes[i + 1]);
        let a = hermite(l.k, l.a, l.da, r.k, r.a, r.da, k);
        let b = hermite(l.k, l.b, l.db, r.k, r.b, r.db, k);
        Some((a, b))
    }
}

/// Real zeros of `b` are minima of `|b|^2` with zero residual; Gauss-Newton
/// on the real line, seeded at the tabulated minima, converges quadratically
/// to them and stalls with a visible residual elsewhere.
fn find_real_zeros(p: &Pulse, nodes: &[Node], tol: &OdeTolerance) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for w in nodes.windows(3) {
        let (l, m, r) = (w[0].b.norm(), w[1].b.norm(), w[2].b.norm());
        if !(m <= l && m <= r && m < 1e-2) {
            continue;
        }
        let mut k = w[1].k;
        let mut residual = f64::INFINITY;
        for _ in 0..50 {
            let Ok([b, _, db, _]) = column2_with_derivative(p, C64::new(k, 0.0), tol) else {
                break;
            };
            residual = b.norm();
            let step = (b.conj() * db).re / db.norm_sqr();
            if !step.is_finite() {
                break;
            }
            k -= step;
            if step.abs() < 1e-14 * (1.0 + k.abs()) {
                break;
            }
        }
        let inside = k >= w[0].k && k <= w[2].k;
        if inside && residual < 1e-9 && out.last().is_none_or(|&q| (q - k).abs() > 1e-9) {
            out.push(k);
        }
    }
    out
}
