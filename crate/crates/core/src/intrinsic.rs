//! Candidate data `(p, q, κ)` and the intrinsic special Kähler residuals.

use crate::connection::{ch_model, ConnectionData, CurvatureData};
use crate::error::{Error, Result};
use crate::exterior::{apply_j_matrix, Form, FormMatrix};
use crate::lie::{AdaptedBasis, LieAlgebra};

/// Coefficient of the `κ` coupling in the `dP`/`dQ` equations.
///
/// The sign is fixed by requiring that the cone connection with
/// `dτ = φ − 2κ` be flat on the known solutions; the terms enter as
/// `+4κ∧q` and `−4κ∧p`.
pub const KAPPA_COUPLING: f64 = 4.0;

/// Totally symmetric 3-tensor stored on sorted index triples.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensor3 {
    n: usize,
    values: Vec<f64>,
}

/// Sorted triples `i ≤ j ≤ k` in lexicographic order.
pub fn sorted_triples(n: usize) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for i in 0..n {
        for j in i..n {
            for k in j..n {
                out.push((i, j, k));
            }
        }
    }
    out
}

fn sort3(i: usize, j: usize, k: usize) -> (usize, usize, usize) {
    let mut v = [i, j, k];
    v.sort_unstable();
    (v[0], v[1], v[2])
}

/// Number of distinct orderings of a sorted triple.
pub fn multiplicity((i, j, k): (usize, usize, usize)) -> f64 {
    if i == j && j == k {
        1.0
    } else if i == j || j == k {
        3.0
    } else {
        6.0
    }
}

impl SymTensor3 {
    pub fn zeros(n: usize) -> Self {
        Self { n, values: vec![0.0; sorted_triples(n).len()] }
    }

    /// From values listed in [`sorted_triples`] order.
    pub fn from_values(n: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), sorted_triples(n).len());
        Self { n, values }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn position(&self, i: usize, j: usize, k: usize) -> usize {
        assert!(i < self.n && j < self.n && k < self.n, "tensor index out of range");
        let (i, j, k) = sort3(i, j, k);
        sorted_triples(self.n).binary_search(&(i, j, k)).expect("sorted triple")
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.position(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let p = self.position(i, j, k);
        self.values[p] = v;
    }

    /// Inner product over all ordered index triples.
    pub fn full_dot(&self, other: &Self) -> f64 {
        sorted_triples(self.n)
            .into_iter()
            .zip(self.values.iter().zip(&other.values))
            .map(|(t, (x, y))| multiplicity(t) * x * y)
            .sum()
    }

    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Self {
        let values = self.values.iter().zip(&other.values).map(|(x, y)| a * x + b * y).collect();
        Self { n: self.n, values }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PskCandidate {
    /// `a`-coefficients of `q`.
    pub sa: SymTensor3,
    /// `b`-coefficients of `q`.
    pub sb: SymTensor3,
    pub kappa: Form<f64>,
}

impl PskCandidate {
    pub fn new(sa: SymTensor3, sb: SymTensor3, kappa: Form<f64>) -> Self {
        assert_eq!(sa.n, sb.n);
        Self { sa, sb, kappa }
    }

    /// Construct and verify `dκ = ω_S` on the given algebra.
    pub fn checked(alg: &LieAlgebra, basis: &AdaptedBasis, sa: SymTensor3, sb: SymTensor3, kappa: Form<f64>) -> Result<Self> {
        let c = Self::new(sa, sb, kappa);
        c.check_primitive(alg, basis)?;
        Ok(c)
    }

    pub fn zero(n: usize, kappa: Form<f64>) -> Self {
        Self::new(SymTensor3::zeros(n), SymTensor3::zeros(n), kappa)
    }

    pub fn n(&self) -> usize {
        self.sa.n
    }

    pub fn check_primitive(&self, alg: &LieAlgebra, basis: &AdaptedBasis) -> Result<()> {
        basis.check(alg)?;
        if self.kappa.dim() != alg.dim() || self.sa.n != basis.n {
            return Err(Error::DimensionMismatch(self.kappa.dim(), alg.dim()));
        }
        let residual = (&alg.ce_differential(&self.kappa) - &basis.kahler_form()).max_abs();
        if residual > 1e-9 {
            return Err(Error::BadPrimitive { residual });
        }
        Ok(())
    }

    /// Candidate with `(p, q)` replaced by `R_s(p, q)`.
    pub fn rotated(&self, s: f64) -> Self {
        let (sa, sb) = rotate_tensors(&self.sa, &self.sb, s);
        Self { sa, sb, kappa: self.kappa.clone() }
    }

    /// Euclidean norm of the coefficients of `q` over all ordered index triples.
    pub fn pq_norm(&self) -> f64 {
        (self.sa.full_dot(&self.sa) + self.sb.full_dot(&self.sb)).sqrt()
    }
}

/// `q^i_j = Σ_k Sa[i,j,k] a^k + Sb[i,j,k] b^k` and `p = Jq`.
pub fn build_pq(cand: &PskCandidate) -> (FormMatrix, FormMatrix) {
    let n = cand.n();
    let basis = AdaptedBasis::new(n);
    let q = FormMatrix::from_fn(n, n, basis.dim(), |i, j| {
        let mut f = Form::zero(basis.dim());
        for k in 0..n {
            f.add_term(1u64 << k, cand.sa.get(i, j, k));
            f.add_term(1u64 << (n + k), cand.sb.get(i, j, k));
        }
        f
    });
    let p = apply_j_matrix(&q, n).expect("q has one-form entries");
    (p, q)
}

fn coframe(basis: &AdaptedBasis) -> (FormMatrix, FormMatrix) {
    let dim = basis.dim();
    let a = FormMatrix::column((0..basis.n).map(|i| basis.a(i)).collect(), dim);
    let b = FormMatrix::column((0..basis.n).map(|i| basis.b(i)).collect(), dim);
    (a, b)
}

/// `(p∧a + q∧b, p∧b − q∧a)` as column vectors of two-forms.
pub fn torsion_vectors(p: &FormMatrix, q: &FormMatrix, basis: &AdaptedBasis) -> (FormMatrix, FormMatrix) {
    let (a, b) = coframe(basis);
    (&(p ^ &a) + &(q ^ &b), &(p ^ &b) - &(q ^ &a))
}

pub fn torsion_residual(p: &FormMatrix, q: &FormMatrix, basis: &AdaptedBasis) -> f64 {
    let (t1, t2) = torsion_vectors(p, q, basis);
    t1.max_abs().max(t2.max_abs())
}

/// `M + p∧p + q∧q − M_CH`.
pub fn tpq_matrix(curv: &CurvatureData, p: &FormMatrix, q: &FormMatrix) -> FormMatrix {
    let model = ch_model(p.rows());
    &(&(&curv.m + &(p ^ p)) + &(q ^ q)) - &model.m
}

/// `Λ + p∧q − q∧p − Λ_CH`.
pub fn wpq_matrix(curv: &CurvatureData, p: &FormMatrix, q: &FormMatrix) -> FormMatrix {
    let model = ch_model(p.rows());
    &(&(&curv.lambda + &(p ^ q)) - &(q ^ p)) - &model.lambda
}

pub fn tpq_residual(curv: &CurvatureData, p: &FormMatrix, q: &FormMatrix) -> f64 {
    tpq_matrix(curv, p, q).max_abs()
}

pub fn wpq_residual(curv: &CurvatureData, p: &FormMatrix, q: &FormMatrix) -> f64 {
    wpq_matrix(curv, p, q).max_abs()
}

/// The `dP` and `dQ` expressions.
pub fn dpq_matrices(p: &FormMatrix, q: &FormMatrix, kappa: &Form<f64>, conn: &ConnectionData, alg: &LieAlgebra) -> (FormMatrix, FormMatrix) {
    let (mu, la) = (&conn.mu, &conn.lambda);
    let d = |x: &FormMatrix| x.map(|f| alg.ce_differential(f));
    let k4 = kappa.scale(KAPPA_COUPLING);
    let ep = &(&(&d(p) + &(&(mu ^ p) + &(p ^ mu))) + &(&(la ^ q) - &(q ^ la))) + &q.left_wedge(&k4);
    let eq = &(&(&d(q) + &(&(mu ^ q) + &(q ^ mu))) - &(&(la ^ p) - &(p ^ la))) - &p.left_wedge(&k4);
    (ep, eq)
}

pub fn dpq_residual(p: &FormMatrix, q: &FormMatrix, kappa: &Form<f64>, conn: &ConnectionData, alg: &LieAlgebra) -> f64 {
    let (ep, eq) = dpq_matrices(p, q, kappa, conn, alg);
    ep.max_abs().max(eq.max_abs())
}

/// The two `κ`-free integrability expressions.
pub fn integrability_matrices(curv: &CurvatureData, p: &FormMatrix, q: &FormMatrix, basis: &AdaptedBasis) -> (FormMatrix, FormMatrix) {
    let (m, la) = (&curv.m, &curv.lambda);
    let w4 = basis.kahler_form().scale(4.0);
    let i1 = &(&(&(m ^ p) - &(p ^ m)) + &(&(la ^ q) + &(q ^ la))) + &q.left_wedge(&w4);
    let i2 = &(&(&(m ^ q) - &(q ^ m)) - &(&(la ^ p) + &(p ^ la))) - &p.left_wedge(&w4);
    (i1, i2)
}

pub fn integrability_residual(curv: &CurvatureData, p: &FormMatrix, q: &FormMatrix, basis: &AdaptedBasis) -> f64 {
    let (i1, i2) = integrability_matrices(curv, p, q, basis);
    i1.max_abs().max(i2.max_abs())
}

/// `R_s(p, q) = (p cos s + q sin s, −p sin s + q cos s)`.
pub fn rotate(p: &FormMatrix, q: &FormMatrix, s: f64) -> (FormMatrix, FormMatrix) {
    let (c, sn) = (s.cos(), s.sin());
    (&p.scale(c) + &q.scale(sn), &p.scale(-sn) + &q.scale(c))
}

/// Action of `R_s` on the coefficient tensors of `q`.
pub fn rotate_tensors(sa: &SymTensor3, sb: &SymTensor3, s: f64) -> (SymTensor3, SymTensor3) {
    let (c, sn) = (s.cos(), s.sin());
    (sa.combine(c, sb, sn), sa.combine(-sn, sb, c))
}

/// All intrinsic residuals of a candidate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntrinsicReport {
    pub torsion: f64,
    pub tpq: f64,
    pub wpq: f64,
    pub dp: f64,
    pub dq: f64,
    pub int_p: f64,
    pub int_q: f64,
}

impl IntrinsicReport {
    /// Largest of the five equations defining the structure.
    pub fn max_primary(&self) -> f64 {
        [self.torsion, self.tpq, self.wpq, self.dp, self.dq].into_iter().fold(0.0, f64::max)
    }

    pub fn max_all(&self) -> f64 {
        self.max_primary().max(self.int_p).max(self.int_q)
    }

    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("torsion", self.torsion),
            ("t_pq", self.tpq),
            ("w_pq", self.wpq),
            ("d_p", self.dp),
            ("d_q", self.dq),
            ("integrability_p", self.int_p),
            ("integrability_q", self.int_q),
        ]
    }
}

pub fn intrinsic_report(alg: &LieAlgebra, basis: &AdaptedBasis, conn: &ConnectionData, curv: &CurvatureData, cand: &PskCandidate) -> IntrinsicReport {
    let (p, q) = build_pq(cand);
    let (ep, eq) = dpq_matrices(&p, &q, &cand.kappa, conn, alg);
    let (i1, i2) = integrability_matrices(curv, &p, &q, basis);
    IntrinsicReport {
        torsion: torsion_residual(&p, &q, basis),
        tpq: tpq_residual(curv, &p, &q),
        wpq: wpq_residual(curv, &p, &q),
        dp: ep.max_abs(),
        dq: eq.max_abs(),
        int_p: i1.max_abs(),
        int_q: i2.max_abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::{curvature, levi_civita};
    use crate::models;
    use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

    fn ch1_pair() -> (LieAlgebra, AdaptedBasis, ConnectionData, CurvatureData, PskCandidate) {
        let alg = models::ch1_pair_algebra();
        let basis = AdaptedBasis::new(2);
        let conn = levi_civita(&alg, &basis).unwrap();
        let curv = curvature(&conn, &alg);
        (alg, basis, conn, curv, models::ch1_pair_candidate())
    }

    #[test]
    fn ch1_pair_matrices() {
        let (p, q) = build_pq(&models::ch1_pair_candidate());
        // q = [[a2, a1], [a1, 0]], p = [[b2, b1], [b1, 0]]
        assert_eq!(q.get(0, 0), &Form::generator(4, 1));
        assert_eq!(q.get(0, 1), &Form::generator(4, 0));
        assert_eq!(q.get(1, 0), &Form::generator(4, 0));
        assert!(q.get(1, 1).is_empty());
        assert_eq!(p.get(0, 0), &Form::generator(4, 3));
        assert_eq!(p.get(0, 1), &Form::generator(4, 2));
        // (p∧q)(1,1) = b2∧a2 + b1∧a1
        let pq = &p ^ &q;
        assert_eq!(pq.get(0, 0), &(&Form::monomial(4, &[3, 1], 1.0) + &Form::monomial(4, &[2, 0], 1.0)));
    }

    #[test]
    fn ch1_pair_residuals_vanish() {
        let (alg, basis, conn, curv, cand) = ch1_pair();
        let r = intrinsic_report(&alg, &basis, &conn, &curv, &cand);
        assert!(r.max_all() < 1e-12, "{r:?}");
        let (p, q) = build_pq(&cand);
        // T-PQ (1,2) entry: b2∧b1 + a2∧a1 against M_CH(1,2) = −a1∧a2 − b1∧b2
        let tp = &(&p ^ &p) + &(&q ^ &q);
        assert_eq!(tp.get(0, 1).coeff(&[1, 0]), 1.0);
        assert_eq!(tp.get(0, 1).coeff(&[3, 2]), 1.0);
        // W-PQ (1,1): Λ + p∧q − q∧p = −4 a1∧b1 − 2 a2∧b2
        let w = &(&curv.lambda + &(&p ^ &q)) - &(&q ^ &p);
        assert!((w.get(0, 0).coeff(&[0, 2]) + 4.0).abs() < 1e-14);
        assert!((w.get(0, 0).coeff(&[1, 3]) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn ch1_pair_dp_entry_cancels() {
        let (alg, _, conn, _, cand) = ch1_pair();
        let (p, q) = build_pq(&cand);
        let (ep, _) = dpq_matrices(&p, &q, &cand.kappa, &conn, &alg);
        assert!(ep.get(0, 0).max_abs() < 1e-14);
        // without the κ term the (1,1) entry is 2 a2∧b2 + 2√2 a2∧b1
        let bare = &ep - &q.left_wedge(&cand.kappa.scale(KAPPA_COUPLING));
        assert!((bare.get(0, 0).coeff(&[1, 3]) - 2.0).abs() < 1e-14);
        assert!((bare.get(0, 0).coeff(&[1, 2]) - 2.0 * SQRT_2).abs() < 1e-14);
    }

    #[test]
    fn kappa_sign_regression() {
        // flipping the coupling sign breaks the CH(1)×CH(1) solution
        let (alg, _, conn, _, cand) = ch1_pair();
        let (p, q) = build_pq(&cand);
        let flipped = cand.kappa.scale(-1.0);
        assert!(dpq_residual(&p, &q, &flipped, &conn, &alg) > 1.0);
    }

    #[test]
    fn single_index_case() {
        let mut sa = SymTensor3::zeros(1);
        sa.set(0, 0, 0, 0.7);
        let (p, q) = build_pq(&PskCandidate::new(sa, SymTensor3::zeros(1), Form::zero(2)));
        assert_eq!(q.get(0, 0), &Form::generator(2, 0).scale(0.7));
        assert_eq!(p.get(0, 0), &Form::generator(2, 1).scale(0.7));
    }

    #[test]
    fn ch1_closed_forms() {
        let c = 2.0 / 3f64.sqrt();
        let x = ((4.0 - c * c) / 2.0).sqrt();
        let alg = models::ch1(c);
        let basis = AdaptedBasis::new(1);
        let conn = levi_civita(&alg, &basis).unwrap();
        let curv = curvature(&conn, &alg);
        let cand = models::ch1_candidate(c, x);
        let r = intrinsic_report(&alg, &basis, &conn, &curv, &cand);
        assert!(r.max_all() < 1e-12, "{r:?}");
        // at c = 1.5 the dP expression is x(3c − 4/c) a∧b
        let c: f64 = 1.5;
        let x = ((4.0 - c * c) / 2.0).sqrt();
        let alg = models::ch1(c);
        let conn = levi_civita(&alg, &basis).unwrap();
        let cand = models::ch1_candidate(c, x);
        let (p, q) = build_pq(&cand);
        let (ep, _) = dpq_matrices(&p, &q, &cand.kappa, &conn, &alg);
        assert!((ep.get(0, 0).coeff(&[0, 1]) - x * (3.0 * c - 4.0 / c)).abs() < 1e-14);
        // W-PQ: (−c² − 2x²) − (−4)
        let curv = curvature(&conn, &alg);
        assert!(wpq_residual(&curv, &p, &q) < 1e-14);
        let cand = models::ch1_candidate(2.0, 0.5);
        let (p, q) = build_pq(&cand);
        let curv2 = curvature(&levi_civita(&models::ch1(2.0), &basis).unwrap(), &models::ch1(2.0));
        assert!((wpq_residual(&curv2, &p, &q) - 0.5).abs() < 1e-14);
        assert_eq!(tpq_residual(&curv2, &p, &q), 0.0);
    }

    #[test]
    fn torsion_detects_asymmetry() {
        let basis = AdaptedBasis::new(2);
        let q = FormMatrix::from_fn(2, 2, 4, |i, j| if (i, j) == (0, 0) { Form::generator(4, 1) } else { Form::zero(4) });
        let p = apply_j_matrix(&q, 2).unwrap();
        assert!(torsion_residual(&p, &q, &basis) > 0.5);
        let z = FormMatrix::zeros(2, 2, 4);
        assert_eq!(torsion_residual(&z, &z, &basis), 0.0);
    }

    #[test]
    fn wrong_candidate_breaks_integrability() {
        let (_, basis, _, curv, _) = ch1_pair();
        let q = FormMatrix::from_fn(2, 2, 4, |i, j| if (i, j) == (0, 0) { Form::generator(4, 0) } else { Form::zero(4) });
        let p = apply_j_matrix(&q, 2).unwrap();
        assert!(integrability_residual(&curv, &p, &q, &basis) > 0.5);
        let z = FormMatrix::zeros(2, 2, 4);
        assert_eq!(integrability_residual(&curv, &z, &z, &basis), 0.0);
    }

    #[test]
    fn rotation_examples() {
        let (p, q) = build_pq(&models::ch1_pair_candidate());
        assert_eq!(rotate(&p, &q, 0.0), (p.clone(), q.clone()));
        let (p1, q1) = rotate(&p, &q, FRAC_PI_2);
        assert!((&p1 - &q).max_abs() < 1e-15 && (&q1 + &p).max_abs() < 1e-15);
        let (p2, q2) = rotate(&p, &q, PI);
        assert!((&p2 + &p).max_abs() < 1e-15 && (&q2 + &q).max_abs() < 1e-15);
        // tensor action agrees with the matrix action
        let cand = models::ch1_pair_candidate().rotated(0.4);
        let (pr, qr) = build_pq(&cand);
        let (pe, qe) = rotate(&p, &q, 0.4);
        assert!((&pr - &pe).max_abs() < 1e-15 && (&qr - &qe).max_abs() < 1e-15);
    }
}
