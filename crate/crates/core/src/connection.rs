//! Levi-Civita connection and curvature blocks in an adapted coframe.
//!
//! On a Kähler Lie algebra the connection matrix has the shape
//! `[[μ, λ], [-λ, μ]]` with `μ` skew and `λ` symmetric, and its curvature
//! has the shape `[[M, Λ], [-Λ, M]]`.

use crate::error::{Error, Result};
use crate::exterior::{Form, FormMatrix};
use crate::lie::{AdaptedBasis, LieAlgebra};

pub const KAHLER_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionData {
    pub mu: FormMatrix,
    pub lambda: FormMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureData {
    pub m: FormMatrix,
    pub lambda: FormMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KahlerReport {
    pub closedness: f64,
    pub shape_residual: f64,
}

impl KahlerReport {
    pub fn is_kahler(&self) -> bool {
        self.closedness < KAHLER_TOL && self.shape_residual < KAHLER_TOL
    }
}

/// Connection one-forms `ω^k_j = Σ_i Γ_{ijk} e^i` of an orthonormal basis, from Koszul.
pub fn koszul_matrix(alg: &LieAlgebra) -> FormMatrix {
    let m = alg.dim();
    let c = |i, j, k| alg.structure_constant(i, j, k);
    let mut w = FormMatrix::zeros(m, m, m);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let g = 0.5 * (c(i, j, k) - c(j, k, i) + c(k, i, j));
                if g != 0.0 {
                    w.get_mut(k, j).add_term(1u64 << i, g);
                }
            }
        }
    }
    w
}

/// `‖dθ + ω ∧ θ‖` for the coframe column `θ`.
pub fn structural_residual(alg: &LieAlgebra, omega: &FormMatrix) -> f64 {
    let m = alg.dim();
    let theta = FormMatrix::column((0..m).map(|i| Form::generator(m, i)).collect(), m);
    let dtheta = theta.map(|f| alg.ce_differential(f));
    (&dtheta + &(omega ^ &theta)).max_abs()
}

fn shape_residual(omega: &FormMatrix, n: usize) -> f64 {
    let aa = omega.block(0, 0, n, n);
    let ab = omega.block(0, n, n, n);
    let ba = omega.block(n, 0, n, n);
    let bb = omega.block(n, n, n, n);
    [
        (&aa - &bb).max_abs(),
        (&ab + &ba).max_abs(),
        (&aa + &aa.transpose()).max_abs(),
        (&ab - &ab.transpose()).max_abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

pub fn kahler_check(alg: &LieAlgebra, basis: &AdaptedBasis) -> Result<KahlerReport> {
    basis.check(alg)?;
    let closedness = alg.ce_differential(&basis.kahler_form()).max_abs();
    let shape_residual = shape_residual(&koszul_matrix(alg), basis.n);
    Ok(KahlerReport { closedness, shape_residual })
}

pub fn levi_civita(alg: &LieAlgebra, basis: &AdaptedBasis) -> Result<ConnectionData> {
    basis.check(alg)?;
    let n = basis.n;
    let omega = koszul_matrix(alg);
    let residual = structural_residual(alg, &omega);
    if residual > 1e-10 * (1.0 + alg.max_constant()) {
        return Err(Error::StructuralEquation { residual });
    }
    let shape = shape_residual(&omega, n);
    if shape > KAHLER_TOL {
        return Err(Error::NotKahler { residual: shape });
    }
    Ok(ConnectionData { mu: omega.block(0, 0, n, n), lambda: omega.block(0, n, n, n) })
}

impl ConnectionData {
    /// Reassembled `[[μ, λ], [-λ, μ]]`.
    pub fn full(&self) -> FormMatrix {
        let n = self.mu.rows();
        let mut w = FormMatrix::zeros(2 * n, 2 * n, self.mu.dim());
        w.set_block(0, 0, &self.mu);
        w.set_block(0, n, &self.lambda);
        w.set_block(n, 0, &(-&self.lambda));
        w.set_block(n, n, &self.mu);
        w
    }
}

/// `M = dμ + μ∧μ − λ∧λ`, `Λ = dλ + μ∧λ + λ∧μ`.
pub fn curvature(conn: &ConnectionData, alg: &LieAlgebra) -> CurvatureData {
    let (mu, la) = (&conn.mu, &conn.lambda);
    let d = |x: &FormMatrix| x.map(|f| alg.ce_differential(f));
    let m = &(&d(mu) + &(mu ^ mu)) - &(la ^ la);
    let lambda = &(&d(la) + &(mu ^ la)) + &(la ^ mu);
    CurvatureData { m, lambda }
}

/// Curvature blocks of complex hyperbolic space with holomorphic sectional curvature −1.
pub fn ch_model(n: usize) -> CurvatureData {
    let basis = AdaptedBasis::new(n);
    let dim = basis.dim();
    let a = FormMatrix::column((0..n).map(|i| basis.a(i)).collect(), dim);
    let b = FormMatrix::column((0..n).map(|i| basis.b(i)).collect(), dim);
    let m = &(-&(&a ^ &a.transpose())) - &(&b ^ &b.transpose());
    let omega = basis.kahler_form();
    let id = FormMatrix::from_fn(n, n, dim, |i, j| if i == j { omega.scale(-2.0) } else { Form::zero(dim) });
    let lambda = &(&(-&(&a ^ &b.transpose())) + &(&b ^ &a.transpose())) + &id;
    CurvatureData { m, lambda }
}

/// Residual of both second Bianchi identities.
pub fn bianchi_residual(conn: &ConnectionData, curv: &CurvatureData, alg: &LieAlgebra) -> f64 {
    let (mu, la) = (&conn.mu, &conn.lambda);
    let (m, cl) = (&curv.m, &curv.lambda);
    let d = |x: &FormMatrix| x.map(|f| alg.ce_differential(f));
    let r1 = &d(m) - &(&(&(m ^ mu) - &(mu ^ m)) - &(&(cl ^ la) - &(la ^ cl)));
    let r2 = &d(cl) - &(&(&(m ^ la) - &(mu ^ cl)) + &(&(cl ^ mu) - &(la ^ m)));
    r1.max_abs().max(r2.max_abs())
}
