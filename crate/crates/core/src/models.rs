//! Reference algebras and candidates used throughout tests, benches and fixtures.

use std::f64::consts::SQRT_2;

use crate::connection::ConnectionData;
use crate::exterior::{Form, FormMatrix};
use crate::intrinsic::{PskCandidate, SymTensor3};
use crate::lie::{AdaptedBasis, LieAlgebra};

/// Product of complex hyperbolic lines with `[A_i, B_i] = −c_i B_i`.
pub fn ch1_product(cs: &[f64]) -> LieAlgebra {
    let n = cs.len();
    let brackets: Vec<_> = cs.iter().enumerate().filter(|(_, c)| **c != 0.0).map(|(i, c)| (i, n + i, n + i, -c)).collect();
    LieAlgebra::new(2 * n, &brackets).expect("product of two-dimensional algebras")
}

pub fn ch1(c: f64) -> LieAlgebra {
    ch1_product(&[c])
}

/// `CH(1) × CH(1)` with `c₁ = √2`, `c₂ = 2`.
pub fn ch1_pair_algebra() -> LieAlgebra {
    ch1_product(&[SQRT_2, 2.0])
}

/// `q = [[a², a¹], [a¹, 0]]`, `κ = b¹/√2 + b²/2`.
pub fn ch1_pair_candidate() -> PskCandidate {
    let mut sa = SymTensor3::zeros(2);
    sa.set(0, 0, 1, 1.0);
    let kappa = &Form::generator(4, 2).scale(1.0 / SQRT_2) + &Form::generator(4, 3).scale(0.5);
    PskCandidate::new(sa, SymTensor3::zeros(2), kappa)
}

/// `q = x a` on `CH(1)` with `κ = b / c`.
pub fn ch1_candidate(c: f64, x: f64) -> PskCandidate {
    let mut sa = SymTensor3::zeros(1);
    sa.set(0, 0, 0, x);
    PskCandidate::new(sa, SymTensor3::zeros(1), Form::generator(2, 1).scale(1.0 / c))
}

/// Flat factor times a complex hyperbolic line.
pub fn flat_times_ch1(c: f64) -> LieAlgebra {
    ch1_product(&[0.0, c])
}

/// Cyclic pattern `q_AB = a_C` on `CH(1)³` with `κ = (b_A + b_B + b_C)/2`.
pub fn ch1_cubed_candidate() -> PskCandidate {
    let mut sa = SymTensor3::zeros(3);
    sa.set(0, 1, 2, 1.0);
    let mut kappa = Form::zero(6);
    for i in 0..3 {
        kappa.add_term(1u64 << (3 + i), 0.5);
    }
    PskCandidate::new(sa, SymTensor3::zeros(3), kappa)
}

/// Connection blocks `μ = [[0, a_Rᵀ], [−a_R, 0]]`, `λ = [[2b₁, b_Rᵀ], [b_R, b₁ id]]`.
pub fn ch_flat_connection(n: usize) -> ConnectionData {
    let basis = AdaptedBasis::new(n);
    let dim = basis.dim();
    let mu = FormMatrix::from_fn(n, n, dim, |i, j| match (i, j) {
        (0, j) if j > 0 => basis.a(j),
        (i, 0) if i > 0 => basis.a(i).scale(-1.0),
        _ => Form::zero(dim),
    });
    let lambda = FormMatrix::from_fn(n, n, dim, |i, j| match (i, j) {
        (0, 0) => basis.b(0).scale(2.0),
        (0, j) => basis.b(j),
        (i, 0) => basis.b(i),
        (i, j) if i == j => basis.b(0),
        _ => Form::zero(dim),
    });
    ConnectionData { mu, lambda }
}

/// Solvable algebra of complex hyperbolic space, read off from `dθ = −ω ∧ θ`.
pub fn ch_flat_algebra(n: usize) -> LieAlgebra {
    let conn = ch_flat_connection(n);
    let dim = 2 * n;
    let omega = conn.full();
    let theta = FormMatrix::column((0..dim).map(|i| Form::generator(dim, i)).collect(), dim);
    let dtheta = -&(&omega ^ &theta);
    let mut brackets = Vec::new();
    for k in 0..dim {
        for (b, c) in dtheta.get(k, 0).terms() {
            let i = b.trailing_zeros() as usize;
            let j = 63 - b.leading_zeros() as usize;
            brackets.push((i, j, k, -c));
        }
    }
    LieAlgebra::new(dim, &brackets).expect("complex hyperbolic algebra satisfies Jacobi")
}

/// `κ` for [`ch_flat_algebra`]: minimum-norm primitive of the Kähler form.
pub fn ch_flat_kappa(n: usize) -> Form<f64> {
    ch_flat_algebra(n).solve_primitive(&AdaptedBasis::new(n).kahler_form()).expect("exact Kähler form").kappa
}
