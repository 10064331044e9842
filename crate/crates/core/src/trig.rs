//! Coefficient ring of finite sums `r · t^k · cos^a τ · sin^b τ` with `b ≤ 1`.

use std::collections::BTreeMap;
use std::fmt;

use crate::exterior::{Coeff, PRUNE_EPS};

/// Exponents `(k, a, b)` of `t^k cos^a τ sin^b τ`.
pub type TrigMonomial = (i32, u32, u32);

#[derive(Clone, PartialEq, Default)]
pub struct TrigLaurent {
    terms: BTreeMap<TrigMonomial, f64>,
}

impl TrigLaurent {
    pub fn constant(r: f64) -> Self {
        Self::monomial(r, 0, 0, 0)
    }

    /// `r t^k cos^a τ sin^b τ`, reduced to canonical form.
    pub fn monomial(r: f64, k: i32, a: u32, b: u32) -> Self {
        let mut out = Self::default();
        out.push(r, k, a, b);
        out
    }

    pub fn t_pow(k: i32) -> Self {
        Self::monomial(1.0, k, 0, 0)
    }

    pub fn cos() -> Self {
        Self::monomial(1.0, 0, 1, 0)
    }

    pub fn sin() -> Self {
        Self::monomial(1.0, 0, 0, 1)
    }

    /// `cos(mτ)` for integer `m` (negative allowed).
    pub fn cos_multiple(m: i32) -> Self {
        Self::angle_pair(m.unsigned_abs()).0
    }

    /// `sin(mτ)` for integer `m` (negative allowed).
    pub fn sin_multiple(m: i32) -> Self {
        let s = Self::angle_pair(m.unsigned_abs()).1;
        if m < 0 {
            s.scale(-1.0)
        } else {
            s
        }
    }

    fn angle_pair(m: u32) -> (Self, Self) {
        let (mut c, mut s) = (Self::constant(1.0), Self::default());
        for _ in 0..m {
            let nc = c.mul(&Self::cos()).sub(&s.mul(&Self::sin()));
            let ns = s.mul(&Self::cos()).add(&c.mul(&Self::sin()));
            c = nc;
            s = ns;
        }
        (c, s)
    }

    fn push(&mut self, r: f64, k: i32, a: u32, b: u32) {
        if b >= 2 {
            // sin^2 = 1 - cos^2
            self.push(r, k, a, b - 2);
            self.push(-r, k, a + 2, b - 2);
            return;
        }
        let e = self.terms.entry((k, a, b)).or_insert(0.0);
        *e += r;
        if e.abs() < PRUNE_EPS {
            self.terms.remove(&(k, a, b));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (TrigMonomial, f64)> + '_ {
        self.terms.iter().map(|(m, r)| (*m, *r))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn d_dt(&self) -> Self {
        let mut out = Self::default();
        for (&(k, a, b), &r) in &self.terms {
            if k != 0 {
                out.push(r * k as f64, k - 1, a, b);
            }
        }
        out
    }

    pub fn d_dtau(&self) -> Self {
        let mut out = Self::default();
        for (&(k, a, b), &r) in &self.terms {
            if a > 0 {
                out.push(-r * a as f64, k, a - 1, b + 1);
            }
            if b > 0 {
                out.push(r * b as f64, k, a + 1, b - 1);
            }
        }
        out
    }

    pub fn eval(&self, t: f64, tau: f64) -> f64 {
        let (c, s) = (tau.cos(), tau.sin());
        self.terms
            .iter()
            .map(|(&(k, a, b), &r)| r * t.powi(k) * c.powi(a as i32) * s.powi(b as i32))
            .sum()
    }

    /// Coefficient of the constant monomial.
    pub fn constant_part(&self) -> f64 {
        self.terms.get(&(0, 0, 0)).copied().unwrap_or(0.0)
    }

    /// Largest coefficient among monomials that depend on `t` or `τ`.
    pub fn nonconstant_max(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(m, _)| **m != (0, 0, 0))
            .map(|(_, r)| r.abs())
            .fold(0.0, f64::max)
    }

    /// Largest coefficient among monomials that depend on `τ`.
    pub fn tau_dependent_max(&self) -> f64 {
        self.terms
            .iter()
            .filter(|(&(_, a, b), _)| a != 0 || b != 0)
            .map(|(_, r)| r.abs())
            .fold(0.0, f64::max)
    }
}

impl Coeff for TrigLaurent {
    fn zero() -> Self {
        Self::default()
    }
    fn from_f64(x: f64) -> Self {
        Self::constant(x)
    }
    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(k, a, b), &r) in &other.terms {
            out.push(r, k, a, b);
        }
        out
    }
    fn mul(&self, other: &Self) -> Self {
        let mut out = Self::default();
        for (&(k1, a1, b1), &r1) in &self.terms {
            for (&(k2, a2, b2), &r2) in &other.terms {
                out.push(r1 * r2, k1 + k2, a1 + a2, b1 + b2);
            }
        }
        out
    }
    fn scale(&self, s: f64) -> Self {
        let mut out = Self::default();
        if s != 0.0 {
            for (&m, &r) in &self.terms {
                if (r * s).abs() >= PRUNE_EPS {
                    out.terms.insert(m, r * s);
                }
            }
        }
        out
    }
    fn is_negligible(&self, eps: f64) -> bool {
        self.terms.values().all(|r| r.abs() < eps)
    }
    fn max_abs(&self) -> f64 {
        self.terms.values().map(|r| r.abs()).fold(0.0, f64::max)
    }
}

impl fmt::Debug for TrigLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(&(k, a, b), r)| {
                let mut s = format!("{r}");
                if k != 0 {
                    s.push_str(&format!(" t^{k}"));
                }
                if a != 0 {
                    s.push_str(&format!(" c^{a}"));
                }
                if b != 0 {
                    s.push_str(" s");
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
