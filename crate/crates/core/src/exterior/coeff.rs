use std::fmt::Debug;

/// Coefficients pruned below this magnitude during arithmetic.
pub const PRUNE_EPS: f64 = 1e-14;

/// Scalar ring for exterior forms.
pub trait Coeff: Clone + Debug + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    /// True when every stored number is below `eps`.
    fn is_negligible(&self, eps: f64) -> bool;
    /// Largest absolute stored number.
    fn max_abs(&self) -> f64;

    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn neg(&self) -> Self {
        self.scale(-1.0)
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn scale(&self, s: f64) -> Self {
        self * s
    }
    fn is_negligible(&self, eps: f64) -> bool {
        self.abs() < eps
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
}

/// Comparison tolerance: `|x - y| <= abs_eps + rel_eps * scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroTolerance {
    pub abs_eps: f64,
    pub rel_eps: f64,
}

impl Default for ZeroTolerance {
    fn default() -> Self {
        Self { abs_eps: 1e-9, rel_eps: 1e-9 }
    }
}

impl ZeroTolerance {
    pub fn new(abs_eps: f64, rel_eps: f64) -> Option<Self> {
        (abs_eps > 0.0 && rel_eps > 0.0).then_some(Self { abs_eps, rel_eps })
    }

    pub fn accepts(&self, residual: f64, scale: f64) -> bool {
        residual <= self.abs_eps + self.rel_eps * scale
    }
}
