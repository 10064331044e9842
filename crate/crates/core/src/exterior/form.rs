use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, BitXor, Mul, Neg, Sub};

use super::coeff::{Coeff, PRUNE_EPS};
use crate::error::{Error, Result};

/// Set of generator indices encoded as a bitmask; bit `i` is generator `i`.
pub type Blade = u64;

/// Largest supported basis dimension.
pub const MAX_DIM: usize = 64;

pub fn blade_indices(b: Blade) -> Vec<usize> {
    let mut out = Vec::with_capacity(b.count_ones() as usize);
    let mut rest = b;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        out.push(i);
        rest &= rest - 1;
    }
    out
}

pub fn blade_degree(b: Blade) -> usize {
    b.count_ones() as usize
}

/// Sign of `e_x ∧ e_y` relative to the sorted blade `x | y` (zero if they overlap).
pub fn wedge_sign(x: Blade, y: Blade) -> i32 {
    if x & y != 0 {
        return 0;
    }
    let mut swaps = 0u32;
    let mut rest = y;
    while rest != 0 {
        let j = rest.trailing_zeros();
        // generators of x sitting after j must hop over it
        swaps += (x >> j).count_ones();
        rest &= rest - 1;
    }
    if swaps % 2 == 0 {
        1
    } else {
        -1
    }
}

/// All blades of the given degree, ordered lexicographically by index tuple.
pub fn blades_of_degree(dim: usize, degree: usize) -> Vec<Blade> {
    let mut out = Vec::new();
    if degree > dim {
        return out;
    }
    let mut idx: Vec<usize> = (0..degree).collect();
    loop {
        out.push(idx.iter().fold(0u64, |b, &i| b | (1u64 << i)));
        let mut k = degree;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] < dim - degree + k {
                idx[k] += 1;
                for l in k + 1..degree {
                    idx[l] = idx[l - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Element of the exterior algebra over an `dim`-dimensional dual basis.
#[derive(Clone, PartialEq)]
pub struct Form<C: Coeff = f64> {
    dim: usize,
    terms: BTreeMap<Blade, C>,
}

impl<C: Coeff> Form<C> {
    pub fn zero(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "basis dimension {dim} exceeds {MAX_DIM}");
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: C) -> Self {
        let mut f = Self::zero(dim);
        f.add_term(0, c);
        f
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, C::one())
    }

    /// The one-form `e^i`.
    pub fn generator(dim: usize, i: usize) -> Self {
        assert!(i < dim, "generator {i} out of range for dimension {dim}");
        let mut f = Self::zero(dim);
        f.add_term(1u64 << i, C::one());
        f
    }

    /// `c · e^{i_1} ∧ ... ∧ e^{i_k}` for indices in any order.
    pub fn monomial(dim: usize, indices: &[usize], c: C) -> Self {
        let mut f = Self::zero(dim);
        let mut blade = 0u64;
        let mut sign = 1;
        for &i in indices {
            assert!(i < dim, "generator {i} out of range for dimension {dim}");
            let s = wedge_sign(blade, 1u64 << i);
            if s == 0 {
                return f;
            }
            sign *= s;
            blade |= 1u64 << i;
        }
        f.add_term(blade, if sign > 0 { c } else { c.neg() });
        f
    }

    pub fn from_blade(dim: usize, blade: Blade, c: C) -> Self {
        let mut f = Self::zero(dim);
        f.add_term(blade, c);
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &C)> {
        self.terms.iter().map(|(b, c)| (*b, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Degree of a nonzero homogeneous form.
    pub fn degree(&self) -> Option<usize> {
        let mut it = self.terms.keys().map(|b| blade_degree(*b));
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }

    pub fn blade_coeff(&self, blade: Blade) -> C {
        self.terms.get(&blade).cloned().unwrap_or_else(C::zero)
    }

    /// Coefficient of `e^{i_1} ∧ ... ∧ e^{i_k}` (indices in any order).
    pub fn coeff(&self, indices: &[usize]) -> C {
        let probe = Form::<f64>::monomial(self.dim, indices, 1.0);
        match probe.terms.iter().next() {
            Some((b, s)) => self.blade_coeff(*b).scale(*s),
            None => C::zero(),
        }
    }

    pub fn add_term(&mut self, blade: Blade, c: C) {
        debug_assert!(self.dim == MAX_DIM || blade >> self.dim == 0);
        match self.terms.get_mut(&blade) {
            Some(existing) => {
                let sum = existing.add(&c);
                if sum.is_negligible(PRUNE_EPS) {
                    self.terms.remove(&blade);
                } else {
                    *existing = sum;
                }
            }
            None => {
                if !c.is_negligible(PRUNE_EPS) {
                    self.terms.insert(blade, c);
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        self.check_dim(other);
        for (b, c) in &other.terms {
            self.add_term(*b, c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Self, s: f64) {
        self.check_dim(other);
        for (b, c) in &other.terms {
            self.add_term(*b, c.scale(s));
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_coeffs(|c| c.scale(s))
    }

    pub fn mul_coeff(&self, k: &C) -> Self {
        self.map_coeffs(|c| c.mul(k))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Form<D> {
        let mut out = Form::<D>::zero(self.dim);
        for (b, c) in &self.terms {
            out.add_term(*b, f(c));
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Coeff::max_abs).fold(0.0, f64::max)
    }

    pub fn is_zero(&self, eps: f64) -> bool {
        self.terms.values().all(|c| c.is_negligible(eps))
    }

    /// Wedge product; fails when the basis dimensions differ.
    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = Self::zero(self.dim);
        for (bx, cx) in &self.terms {
            for (by, cy) in &other.terms {
                let s = wedge_sign(*bx, *by);
                if s != 0 {
                    let c = cx.mul(cy);
                    out.add_term(bx | by, if s > 0 { c } else { c.neg() });
                }
            }
        }
        Ok(out)
    }

    /// Contraction with the basis vector dual to `e^v`.
    pub fn interior(&self, v: usize) -> Result<Self> {
        if v >= self.dim {
            return Err(Error::IndexOutOfRange { index: v, dim: self.dim });
        }
        let mut out = Self::zero(self.dim);
        let bit = 1u64 << v;
        for (b, c) in &self.terms {
            if b & bit != 0 {
                let below = (b & (bit - 1)).count_ones();
                out.add_term(b & !bit, if below % 2 == 0 { c.clone() } else { c.neg() });
            }
        }
        Ok(out)
    }

    /// Contraction with the vector whose pairing with `e^i` is `values[i]`.
    pub fn contract(&self, values: &[(usize, C)]) -> Self {
        let mut out = Self::zero(self.dim);
        for (b, c) in &self.terms {
            for (v, val) in values {
                let bit = 1u64 << v;
                if b & bit != 0 {
                    let below = (b & (bit - 1)).count_ones();
                    let k = c.mul(val);
                    out.add_term(b & !bit, if below % 2 == 0 { k } else { k.neg() });
                }
            }
        }
        out
    }

    /// Unique degree-raising derivation with `d e^i = images[i]` and the given rule on coefficients.
    pub fn derivation(&self, images: &[Form<C>], coeff_d: impl Fn(&C) -> Form<C>) -> Self {
        let mut out = Self::zero(self.dim);
        for (b, c) in &self.terms {
            let blade_form = Self::from_blade(self.dim, *b, C::one());
            let dc = coeff_d(c);
            if !dc.is_empty() {
                out.add_assign(&(&dc ^ &blade_form));
            }
            let idx = blade_indices(*b);
            for (pos, &i) in idx.iter().enumerate() {
                if images[i].is_empty() {
                    continue;
                }
                let left: Blade = idx[..pos].iter().fold(0, |acc, &k| acc | (1u64 << k));
                let right: Blade = idx[pos + 1..].iter().fold(0, |acc, &k| acc | (1u64 << k));
                let mut term = Self::from_blade(self.dim, left, C::one()).wedge_unchecked(&images[i]);
                term = term.wedge_unchecked(&Self::from_blade(self.dim, right, C::one()));
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.add_assign(&term.mul_coeff(&c.scale(sign)));
            }
        }
        out
    }

    /// Algebra homomorphism sending `e^i` to `images[i]`, coefficients kept.
    pub fn substitute(&self, images: &[Form<C>]) -> Self {
        let target_dim = images.first().map_or(self.dim, |f| f.dim);
        let mut out = Self::zero(target_dim);
        for (b, c) in &self.terms {
            let mut prod = Form::<C>::constant(target_dim, c.clone());
            for i in blade_indices(*b) {
                prod = prod.wedge_unchecked(&images[i]);
                if prod.is_empty() {
                    break;
                }
            }
            out.add_assign(&prod);
        }
        out
    }

    /// Re-embeds into a larger basis via `index_map[i]`.
    pub fn embed(&self, dim: usize, index_map: &[usize]) -> Self {
        let mut out = Self::zero(dim);
        for (b, c) in &self.terms {
            let idx: Vec<usize> = blade_indices(*b).iter().map(|&i| index_map[i]).collect();
            out.add_assign(&Self::monomial(dim, &idx, c.clone()));
        }
        out
    }

    pub(crate) fn wedge_unchecked(&self, other: &Self) -> Self {
        self.wedge(other).expect("wedge of forms over different bases")
    }

    fn check_dim(&self, other: &Self) {
        assert_eq!(self.dim, other.dim, "forms over different bases");
    }
}

impl<C: Coeff> fmt::Debug for Form<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (b, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let idx: Vec<String> = blade_indices(*b).iter().map(|i| format!("e{}", i + 1)).collect();
            write!(f, "({c:?}){}", if idx.is_empty() { String::new() } else { idx.join("^") })?;
        }
        Ok(())
    }
}

impl<C: Coeff> Add for &Form<C> {
    type Output = Form<C>;
    fn add(self, rhs: Self) -> Form<C> {
        let mut out = self.clone();
        out.add_assign(rhs);
        out
    }
}

impl<C: Coeff> Sub for &Form<C> {
    type Output = Form<C>;
    fn sub(self, rhs: Self) -> Form<C> {
        let mut out = self.clone();
        out.add_scaled(rhs, -1.0);
        out
    }
}

impl<C: Coeff> Neg for &Form<C> {
    type Output = Form<C>;
    fn neg(self) -> Form<C> {
        self.scale(-1.0)
    }
}

impl<C: Coeff> Mul<f64> for &Form<C> {
    type Output = Form<C>;
    fn mul(self, s: f64) -> Form<C> {
        self.scale(s)
    }
}

/// Wedge product; panics when the bases differ (use [`Form::wedge`] to get an error instead).
impl<C: Coeff> BitXor for &Form<C> {
    type Output = Form<C>;
    fn bitxor(self, rhs: Self) -> Form<C> {
        self.wedge_unchecked(rhs)
    }
}
