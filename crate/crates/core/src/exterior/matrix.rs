use std::ops::{Add, Neg, Sub};

use super::coeff::Coeff;
use super::form::Form;
use crate::error::{Error, Result};

/// Dense matrix of forms over a common basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FormMatrix<C: Coeff = f64> {
    rows: usize,
    cols: usize,
    dim: usize,
    entries: Vec<Form<C>>,
}

impl<C: Coeff> FormMatrix<C> {
    pub fn zeros(rows: usize, cols: usize, dim: usize) -> Self {
        Self { rows, cols, dim, entries: vec![Form::zero(dim); rows * cols] }
    }

    /// Degree-0 identity.
    pub fn identity(n: usize, dim: usize) -> Self {
        Self::from_fn(n, n, dim, |i, j| if i == j { Form::one(dim) } else { Form::zero(dim) })
    }

    pub fn from_fn(rows: usize, cols: usize, dim: usize, mut f: impl FnMut(usize, usize) -> Form<C>) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let e = f(i, j);
                assert_eq!(e.dim(), dim, "entry over a different basis");
                entries.push(e);
            }
        }
        Self { rows, cols, dim, entries }
    }

    /// Column vector.
    pub fn column(forms: Vec<Form<C>>, dim: usize) -> Self {
        let rows = forms.len();
        Self::from_fn(rows, 1, dim, |i, _| forms[i].clone())
    }

    /// Row vector.
    pub fn row(forms: Vec<Form<C>>, dim: usize) -> Self {
        let cols = forms.len();
        Self::from_fn(1, cols, dim, |_, j| forms[j].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &Form<C> {
        &self.entries[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Form<C> {
        &mut self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, f: Form<C>) {
        assert_eq!(f.dim(), self.dim);
        self.entries[i * self.cols + j] = f;
    }

    pub fn entries(&self) -> &[Form<C>] {
        &self.entries
    }

    /// Common degree of the nonzero entries, if homogeneous.
    pub fn degree(&self) -> Option<usize> {
        let mut d = None;
        for e in &self.entries {
            if e.is_empty() {
                continue;
            }
            let de = e.degree()?;
            match d {
                None => d = Some(de),
                Some(x) if x != de => return None,
                _ => {}
            }
        }
        d
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, self.dim, |i, j| self.get(j, i).clone())
    }

    pub fn map(&self, f: impl Fn(&Form<C>) -> Form<C>) -> Self {
        Self::from_fn(self.rows, self.cols, self.dim, |i, j| f(self.get(i, j)))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|e| e.scale(s))
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, self.dim, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    /// `(A ∧ B)^i_j = Σ_k A^i_k ∧ B^k_j`.
    pub fn wedge_matrix(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch(self.rows, self.cols, other.rows, other.cols));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = Self::zeros(self.rows, other.cols, self.dim);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_empty() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_empty() {
                        let w = a ^ b;
                        out.get_mut(i, j).add_assign(&w);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Entrywise `f ∧ A`.
    pub fn left_wedge(&self, f: &Form<C>) -> Self {
        self.map(|e| f ^ e)
    }

    /// Entrywise `A ∧ f`.
    pub fn right_wedge(&self, f: &Form<C>) -> Self {
        self.map(|e| e ^ f)
    }

    /// Left multiplication by a constant matrix.
    pub fn left_mul_const(&self, m: &[Vec<f64>]) -> Self {
        Self::from_fn(m.len(), self.cols, self.dim, |i, j| {
            let mut acc = Form::zero(self.dim);
            for (k, &mk) in m[i].iter().enumerate() {
                if mk != 0.0 {
                    acc.add_scaled(self.get(k, j), mk);
                }
            }
            acc
        })
    }

    /// Right multiplication by a constant matrix.
    pub fn right_mul_const(&self, m: &[Vec<f64>]) -> Self {
        let cols = m.first().map_or(0, Vec::len);
        Self::from_fn(self.rows, cols, self.dim, |i, j| {
            let mut acc = Form::zero(self.dim);
            for (k, row) in m.iter().enumerate() {
                if row[j] != 0.0 {
                    acc.add_scaled(self.get(i, k), row[j]);
                }
            }
            acc
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(Form::max_abs).fold(0.0, f64::max)
    }

    fn zip(&self, other: &Self, f: impl Fn(&Form<C>, &Form<C>) -> Form<C>) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "matrix shapes differ");
        Self::from_fn(self.rows, self.cols, self.dim, |i, j| f(self.get(i, j), other.get(i, j)))
    }
}

impl<C: Coeff> Add for &FormMatrix<C> {
    type Output = FormMatrix<C>;
    fn add(self, rhs: Self) -> FormMatrix<C> {
        self.zip(rhs, |a, b| a + b)
    }
}

impl<C: Coeff> Sub for &FormMatrix<C> {
    type Output = FormMatrix<C>;
    fn sub(self, rhs: Self) -> FormMatrix<C> {
        self.zip(rhs, |a, b| a - b)
    }
}

impl<C: Coeff> Neg for &FormMatrix<C> {
    type Output = FormMatrix<C>;
    fn neg(self) -> FormMatrix<C> {
        self.scale(-1.0)
    }
}

/// Wedge-matrix product; panics on shape mismatch.
impl<C: Coeff> std::ops::BitXor for &FormMatrix<C> {
    type Output = FormMatrix<C>;
    fn bitxor(self, rhs: Self) -> FormMatrix<C> {
        self.wedge_matrix(rhs).expect("wedge of incompatible form matrices")
    }
}
