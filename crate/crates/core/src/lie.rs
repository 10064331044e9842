//! Lie algebras by structure constants and their Chevalley–Eilenberg complex.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exterior::{blade_indices, blades_of_degree, Form};

/// Real Lie algebra with `[e_i, e_j] = Σ_k c^k_{ij} e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    /// `c[(i * dim + j) * dim + k] = c^k_{ij}`, antisymmetric in `(i, j)`.
    c: Vec<f64>,
}

impl LieAlgebra {
    pub fn abelian(dim: usize) -> Self {
        Self { dim, c: vec![0.0; dim * dim * dim] }
    }

    /// From sparse brackets `(i, j, k, c)` with `i < j` (zero-based); repeated entries add.
    pub fn from_brackets(dim: usize, brackets: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let mut alg = Self::abelian(dim);
        for &(i, j, k, v) in brackets {
            for idx in [i, j, k] {
                if idx >= dim {
                    return Err(Error::IndexOutOfRange { index: idx, dim });
                }
            }
            if i >= j {
                return Err(Error::InvalidAlgebra(format!("bracket ({i}, {j}) must have i < j")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidAlgebra("non-finite structure constant".into()));
            }
            alg.c[(i * dim + j) * dim + k] += v;
            alg.c[(j * dim + i) * dim + k] -= v;
        }
        Ok(alg)
    }

    /// Like [`from_brackets`](Self::from_brackets) but also rejects Jacobi failures.
    pub fn new(dim: usize, brackets: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let alg = Self::from_brackets(dim, brackets)?;
        let res = alg.jacobi_residual();
        let scale = 1.0 + alg.max_constant();
        if res > 1e-10 * scale * scale {
            return Err(Error::InvalidAlgebra(format!("Jacobi residual {res:.3e}")));
        }
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    pub fn max_constant(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Nonzero brackets with `i < j`, ordered by `(i, j, k)`.
    pub fn brackets(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in 0..self.dim {
                    let v = self.structure_constant(i, j, k);
                    if v != 0.0 {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }

    /// Coordinates of `[x, y]`.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let m = self.dim;
        let mut out = vec![0.0; m];
        for i in 0..m {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..m {
                if y[j] == 0.0 {
                    continue;
                }
                let w = x[i] * y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    *o += w * self.structure_constant(i, j, k);
                }
            }
        }
        out
    }

    /// Largest component of the cyclic sum `[[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]`.
    pub fn jacobi_residual(&self) -> f64 {
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    for l in 0..m {
                        let mut s = 0.0;
                        for p in 0..m {
                            s += self.structure_constant(i, j, p) * self.structure_constant(p, k, l)
                                + self.structure_constant(j, k, p) * self.structure_constant(p, i, l)
                                + self.structure_constant(k, i, p) * self.structure_constant(p, j, l);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }

    /// `d e^k = -Σ_{i<j} c^k_{ij} e^i ∧ e^j`.
    pub fn generator_differentials(&self) -> Vec<Form<f64>> {
        let m = self.dim;
        (0..m)
            .map(|k| {
                let mut f = Form::zero(m);
                for i in 0..m {
                    for j in i + 1..m {
                        let v = self.structure_constant(i, j, k);
                        if v != 0.0 {
                            f.add_term((1u64 << i) | (1u64 << j), -v);
                        }
                    }
                }
                f
            })
            .collect()
    }

    /// Chevalley–Eilenberg differential on invariant forms.
    pub fn ce_differential(&self, x: &Form<f64>) -> Form<f64> {
        assert_eq!(x.dim(), self.dim, "form over a different basis");
        x.derivation(&self.generator_differentials(), |_| Form::zero(self.dim))
    }

    /// Matrix of `d` from k-forms to (k+1)-forms in lexicographic blade order.
    pub fn differential_matrix(&self, degree: usize) -> DMatrix<f64> {
        let src = blades_of_degree(self.dim, degree);
        let dst = blades_of_degree(self.dim, degree + 1);
        let images = self.generator_differentials();
        let mut mat = DMatrix::zeros(dst.len(), src.len());
        for (col, b) in src.iter().enumerate() {
            let f = Form::from_blade(self.dim, *b, 1.0).derivation(&images, |_| Form::zero(self.dim));
            for (row, d) in dst.iter().enumerate() {
                mat[(row, col)] = f.blade_coeff(*d);
            }
        }
        mat
    }

    /// Solves `dκ = ω` for a one-form `κ` by least squares.
    ///
    /// Returns the minimum-norm solution and a basis of closed one-forms in
    /// reduced echelon form.
    pub fn solve_primitive(&self, omega: &Form<f64>) -> Result<Primitive> {
        let m = self.dim;
        let d1 = self.differential_matrix(1);
        let rows = blades_of_degree(m, 2);
        let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|b| omega.blade_coeff(*b)));
        let scale = 1.0 + omega.max_abs();
        let svd = d1.clone().svd(true, true);
        let smax = svd.singular_values.iter().fold(0.0f64, |a, b| a.max(*b));
        let cut = 1e-10 * smax.max(1.0);
        let sol = svd.solve(&rhs, cut).map_err(|e| Error::InvalidAlgebra(e.to_string()))?;
        let residual = (&d1 * &sol - &rhs).amax();
        if residual > 1e-9 * scale {
            return Err(Error::NotExact { residual });
        }
        let kappa = Form::from_coeffs(m, sol.iter().copied());
        let kernel = null_space(&d1, cut)
            .into_iter()
            .map(|v| Form::from_coeffs(m, v.into_iter()))
            .collect();
        Ok(Primitive { kappa, kernel, residual })
    }

    /// Dimensions of the derived series `g ⊇ [g,g] ⊇ ...` until it stabilises.
    pub fn derived_series_dims(&self) -> Vec<usize> {
        let m = self.dim;
        let mut dims = vec![m];
        let mut basis: Vec<Vec<f64>> = (0..m).map(|i| unit(m, i)).collect();
        loop {
            let mut spans = Vec::new();
            for x in &basis {
                for y in &basis {
                    spans.push(self.bracket(x, y));
                }
            }
            basis = column_space(&spans, m);
            let d = basis.len();
            if d == *dims.last().unwrap() {
                break;
            }
            dims.push(d);
            if d == 0 {
                break;
            }
        }
        dims
    }

    /// Matrix of `ad(x)` acting on coordinates.
    pub fn ad(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.dim;
        DMatrix::from_fn(m, m, |k, j| (0..m).map(|i| x[i] * self.structure_constant(i, j, k)).sum())
    }

    /// `B(e_i, e_j) = tr(ad e_i ∘ ad e_j)`.
    pub fn killing_form(&self) -> DMatrix<f64> {
        let m = self.dim;
        let ads: Vec<DMatrix<f64>> = (0..m).map(|i| self.ad(&unit(m, i))).collect();
        DMatrix::from_fn(m, m, |i, j| (&ads[i] * &ads[j]).trace())
    }
}

/// Primitive of a two-form together with the closed one-forms.
#[derive(Clone, Debug)]
pub struct Primitive {
    pub kappa: Form<f64>,
    pub kernel: Vec<Form<f64>>,
    pub residual: f64,
}

/// Adapted Kähler basis: `e_i = A_i`, `e_{n+i} = B_i = J A_i`, metric the identity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AdaptedBasis {
    pub n: usize,
}

impl AdaptedBasis {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn check(&self, alg: &LieAlgebra) -> Result<()> {
        if alg.dim() != self.dim() {
            return Err(Error::DimensionMismatch(alg.dim(), self.dim()));
        }
        Ok(())
    }

    pub fn a(&self, i: usize) -> Form<f64> {
        Form::generator(self.dim(), i)
    }

    pub fn b(&self, i: usize) -> Form<f64> {
        Form::generator(self.dim(), self.n + i)
    }

    /// `ω_S = Σ a^i ∧ b^i`.
    pub fn kahler_form(&self) -> Form<f64> {
        let mut w = Form::zero(self.dim());
        for i in 0..self.n {
            w.add_term((1u64 << i) | (1u64 << (self.n + i)), 1.0);
        }
        w
    }
}

impl Form<f64> {
    /// One-form `Σ v_i e^i`.
    pub fn from_coeffs(dim: usize, coeffs: impl Iterator<Item = f64>) -> Self {
        let mut f = Form::zero(dim);
        for (i, v) in coeffs.enumerate() {
            f.add_term(1u64 << i, v);
        }
        f
    }

    /// Coefficients of a one-form as a dense vector.
    pub fn one_form_coeffs(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        for (b, c) in self.terms() {
            if b.count_ones() == 1 {
                v[b.trailing_zeros() as usize] = *c;
            }
        }
        v
    }

    /// Coefficients on all blades of `degree`, in lexicographic order.
    pub fn coeff_vector(&self, degree: usize) -> Vec<f64> {
        blades_of_degree(self.dim(), degree).iter().map(|b| self.blade_coeff(*b)).collect()
    }
}

fn unit(m: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; m];
    v[i] = 1.0;
    v
}

/// Orthonormal basis of the span of `vectors`.
fn column_space(vectors: &[Vec<f64>], m: usize) -> Vec<Vec<f64>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let mat = DMatrix::from_fn(m, vectors.len(), |i, j| vectors[j][i]);
    let svd = mat.svd(true, false);
    let u = svd.u.expect("left singular vectors");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, b| a.max(*b));
    let tol = 1e-9 * smax.max(1.0);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > tol)
        .map(|(k, _)| u.column(k).iter().copied().collect())
        .collect()
}

/// Null space of `mat`, returned as rows of the reduced echelon form.
fn null_space(mat: &DMatrix<f64>, cut: f64) -> Vec<Vec<f64>> {
    let ncols = mat.ncols();
    // pad so the SVD yields a full set of right singular vectors
    let padded = if mat.nrows() < ncols {
        let mut p = DMatrix::zeros(ncols, ncols);
        p.view_mut((0, 0), (mat.nrows(), ncols)).copy_from(mat);
        p
    } else {
        mat.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors");
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s <= cut {
            basis.push(vt.row(k).iter().copied().collect());
        }
    }
    rref(basis)
}

fn rref(mut rows: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let nrows = rows.len();
    if nrows == 0 {
        return rows;
    }
    let ncols = rows[0].len();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let piv = (r..nrows).max_by(|&a, &b| rows[a][c].abs().total_cmp(&rows[b][c].abs())).unwrap();
        if rows[piv][c].abs() < 1e-10 {
            continue;
        }
        rows.swap(r, piv);
        let p = rows[r][c];
        for x in rows[r].iter_mut() {
            *x /= p;
        }
        for i in 0..nrows {
            if i != r {
                let f = rows[i][c];
                if f != 0.0 {
                    for j in 0..ncols {
                        rows[i][j] -= f * rows[r][j];
                    }
                }
            }
        }
        r += 1;
    }
    for row in rows.iter_mut() {
        for x in row.iter_mut() {
            if x.abs() < 1e-13 {
                *x = 0.0;
            }
        }
    }
    rows
}

/// Coefficient vector of a form restricted to the given blades.
pub fn flatten_on(x: &Form<f64>, blades: &[u64]) -> Vec<f64> {
    blades.iter().map(|b| x.blade_coeff(*b)).collect()
}

/// Human-readable index tuple (one-based) of a blade.
pub fn blade_label(b: u64) -> String {
    let idx: Vec<String> = blade_indices(b).iter().map(|i| (i + 1).to_string()).collect();
    idx.join(",")
}
