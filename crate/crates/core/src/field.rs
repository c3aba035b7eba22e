use crate::numerics::C64;

/// `(E, N, rho)` at one space-time point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FieldTriple {
    pub e: C64,
    pub n: f64,
    pub rho: C64,
}

impl FieldTriple {
    pub fn new(e: C64, n: f64, rho: C64) -> Self {
        Self { e, n, rho }
    }

    /// The unperturbed amplifier: no field, full inversion.
    pub fn trivial() -> Self {
        Self::new(C64::new(0.0, 0.0), 1.0, C64::new(0.0, 0.0))
    }

    /// `N^2 + |rho|^2 - 1`.
    pub fn bloch_defect(&self) -> f64 {
        self.n * self.n + self.rho.norm_sqr() - 1.0
    }

    /// Largest deviation from the trivial state.
    pub fn distance_from_trivial(&self) -> f64 {
        self.e.norm().max(self.rho.norm()).max((self.n - 1.0).abs())
    }
}
