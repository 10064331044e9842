//! Strategies and property bodies shared by the property and acceptance targets.
#![allow(dead_code)]

use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use psk_core::cone::{special_blocks, tau_dependence, ConeAlgebra};
use psk_core::connection::{koszul_matrix, structural_residual};
use psk_core::exterior::Form;
use psk_core::intrinsic::{build_pq, PskCandidate};
use psk_core::models::ch1_product;
use psk_core::solver::{residual_vector, Geometry};
use psk_core::LieAlgebra;

pub const CASES: u32 = 128;

pub fn homogeneous(dim: usize, degree: usize) -> impl Strategy<Value = Form<f64>> {
    let subset = proptest::sample::subsequence((0..dim).collect::<Vec<_>>(), degree);
    prop::collection::vec((subset, -2.0f64..2.0), 1..5).prop_map(move |terms| {
        let mut f = Form::zero(dim);
        for (idx, c) in terms {
            f.add_assign(&Form::monomial(dim, &idx, c));
        }
        f
    })
}

pub fn mixed(dim: usize) -> impl Strategy<Value = Form<f64>> {
    prop::collection::vec((0u64..(1u64 << dim), -2.0f64..2.0), 0..6).prop_map(move |terms| {
        let mut f = Form::zero(dim);
        for (b, c) in terms {
            f.add_assign(&Form::from_blade(dim, b, c));
        }
        f
    })
}

pub fn close(x: &Form<f64>, y: &Form<f64>, tol: f64) -> bool {
    (x - y).max_abs() <= tol * (1.0 + x.max_abs().max(y.max_abs()))
}

/// Orthogonal matrix from the QR factor of a square matrix.
pub fn orthogonal(entries: &[f64], m: usize) -> DMatrix<f64> {
    let a = DMatrix::from_row_slice(m, m, &entries[..m * m]) + DMatrix::identity(m, m) * 0.1;
    a.qr().q()
}

/// Structure constants of `alg` in the basis `f_a = Σ_i Q_ia e_i`.
pub fn rotate_algebra(alg: &LieAlgebra, q: &DMatrix<f64>) -> LieAlgebra {
    let m = alg.dim();
    let mut br = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in 0..m {
                let mut s = 0.0;
                for (i, j, k, v) in alg.brackets() {
                    s += v * (q[(i, a)] * q[(j, b)] - q[(j, a)] * q[(i, b)]) * q[(k, c)];
                }
                if s.abs() > 1e-15 {
                    br.push((a, b, c, s));
                }
            }
        }
    }
    LieAlgebra::from_brackets(m, &br).unwrap()
}

/// `ℝ ⋉_D ℝ^{m−1}` with `[e_0, e_i] = Σ_j D_ji e_j`.
pub fn semidirect(d: &[f64], m: usize) -> LieAlgebra {
    let k = m - 1;
    let mut br = Vec::new();
    for i in 0..k {
        for j in 0..k {
            let v = d[j * k + i];
            if v != 0.0 {
                br.push((0, i + 1, j + 1, v));
            }
        }
    }
    LieAlgebra::from_brackets(m, &br).unwrap()
}

pub fn random_algebra() -> impl Strategy<Value = LieAlgebra> {
    (3usize..6, prop::collection::vec(-1.5f64..1.5, 36), prop::collection::vec(-1.0f64..1.0, 36), any::<bool>()).prop_map(
        |(m, d, qe, twist)| {
            let alg = semidirect(&d, m);
            if twist {
                rotate_algebra(&alg, &orthogonal(&qe, m))
            } else {
                alg
            }
        },
    )
}

pub fn kahler_geometry() -> impl Strategy<Value = Geometry> {
    prop::collection::vec(0.5f64..3.0, 1..3).prop_map(|cs| Geometry::new(ch1_product(&cs)).unwrap())
}

pub fn candidate_on(geom: &Geometry, vals: &[f64]) -> PskCandidate {
    let x: Vec<f64> = (0..geom.n_unknowns()).map(|i| vals[i % vals.len()]).collect();
    geom.unpack(&x)
}


pub type Check = std::result::Result<(), TestCaseError>;

pub fn wedge_graded_case() -> impl Strategy<Value = (usize, usize, Form<f64>, Form<f64>)> {
    (0usize..4, 0usize..4).prop_flat_map(|(p, q)| (Just(p), Just(q), homogeneous(6, p), homogeneous(6, q)))
}

pub fn check_wedge_associative(x: &Form<f64>, y: &Form<f64>, z: &Form<f64>) -> Check {
    let l = &(x ^ y) ^ z;
    let r = x ^ &(y ^ z);
    prop_assert!(close(&l, &r, 1e-12));
    Ok(())
}

pub fn check_wedge_graded((p, q, x, y): &(usize, usize, Form<f64>, Form<f64>)) -> Check {
    let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
    prop_assert!(close(&(x ^ y), &(y ^ x).scale(sign), 1e-12));
    if p % 2 == 1 {
        prop_assert!((x ^ x).max_abs() < 1e-12);
    }
    Ok(())
}

pub fn check_d_squared(alg: &LieAlgebra, terms: &[(u64, f64)]) -> Check {
    prop_assert!(alg.jacobi_residual() < 1e-10);
    let m = alg.dim();
    let mut x = Form::zero(m);
    for &(b, c) in terms {
        x.add_term(b % (1u64 << m), c);
    }
    let ddx = alg.ce_differential(&alg.ce_differential(&x));
    prop_assert!(ddx.max_abs() < 1e-10 * (1.0 + x.max_abs()));
    for f in alg.generator_differentials() {
        prop_assert!(alg.ce_differential(&f).max_abs() < 1e-10);
    }
    Ok(())
}

pub fn check_koszul(alg: &LieAlgebra) -> Check {
    let w = koszul_matrix(alg);
    prop_assert!(structural_residual(alg, &w) < 1e-12 * (1.0 + alg.max_constant()));
    prop_assert!((&w + &w.transpose()).max_abs() < 1e-14 * (1.0 + alg.max_constant()));
    Ok(())
}

/// Analytic Jacobian of the quadratic model against central differences of the form-level evaluator.
pub fn check_jacobian(geom: &Geometry, vals: &[f64]) -> Check {
    let model = geom.model();
    let x: Vec<f64> = (0..geom.n_unknowns()).map(|i| vals[i % vals.len()]).collect();
    let jac = model.jacobian_at(&x);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for j in 0..x.len() {
        let (mut xp, mut xm) = (x.clone(), x.clone());
        xp[j] += h;
        xm[j] -= h;
        let (rp, rm) = (geom.residual_at(&xp), geom.residual_at(&xm));
        for r in 0..rp.len() {
            worst = worst.max((jac[(r, j)] - (rp[r] - rm[r]) / (2.0 * h)).abs());
        }
    }
    let rel = worst / jac.amax().max(1.0);
    prop_assert!(rel < 1e-5, "relative error {}", rel);
    Ok(())
}

pub fn check_gauge_invariance(geom: &Geometry, vals: &[f64], s: f64) -> Check {
    let cand = candidate_on(geom, vals);
    let norm = |c: &PskCandidate| residual_vector(c, geom).iter().map(|v| v * v).sum::<f64>().sqrt();
    let (a, b) = (norm(&cand), norm(&cand.rotated(s)));
    prop_assert!((a - b).abs() < 1e-9 * (1.0 + a), "{} vs {}", a, b);
    Ok(())
}

pub fn check_tau_independence(geom: &Geometry, vals: &[f64]) -> Check {
    let cand = candidate_on(geom, vals);
    let ca = ConeAlgebra::new(&geom.algebra, &geom.basis, &cand.kappa).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let (p, q) = build_pq(&cand);
    let b = special_blocks(&ca, &geom.connection, &p, &q);
    prop_assert!(tau_dependence(&b.t) < 1e-10);
    prop_assert!(tau_dependence(&b.w) < 1e-10);
    prop_assert!(b.block_match < 1e-10);
    Ok(())
}
