//! The c-map as a twist of the cotangent bundle of the cone.
//!
//! Generators of the twist frame, in order: `ã^i, b̃^i` (`0..2n`), `φ`
//! (`2n`), `ψ̃ = dt/t` (`2n+1`) and the fibre coframe `δ̃_j = δ̂_j / t`
//! (`2n+2+j`, ordered `Ã, B̃, Φ̃, Ψ̃`). Every hatted form is `t` times its
//! tilde counterpart.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cone::{complex_unit, cone_lc_matrix, eta_from_pq, ConeAlgebra};
use crate::connection::{curvature, koszul_matrix, levi_civita};
use crate::dga::{lift, Dga, RForm, RMatrix};
use crate::error::{Error, Result};
use crate::exterior::{blade_indices, blades_of_degree, Coeff, Form, FormMatrix};
use crate::intrinsic::{build_pq, intrinsic_report, PskCandidate};
use crate::lie::{flatten_on, AdaptedBasis, LieAlgebra};
use crate::trig::TrigLaurent;

/// Largest intrinsic residual accepted as input.
pub const PSK_INPUT_TOL: f64 = 1e-8;
/// Tolerance for invariance and constancy of twisted forms.
pub const TWIST_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct TwistFrame {
    n: usize,
    dga: Dga,
    nabla: RMatrix,
}

impl TwistFrame {
    /// Builds the frame from the cone data of a special Kähler candidate.
    pub fn new(alg: &LieAlgebra, basis: &AdaptedBasis, cand: &PskCandidate) -> Result<Self> {
        let ca = ConeAlgebra::new(alg, basis, &cand.kappa)?;
        let conn = levi_civita(alg, basis)?;
        let (p, q) = build_pq(cand);
        let n = basis.n;
        let m = 2 * n + 2;
        let dim = 2 * m;
        let cone_map: Vec<usize> = (0..m).collect();
        // The cone connection never involves dt, so it embeds unchanged.
        let nabla_cone = &cone_lc_matrix(&ca, &conn) + &eta_from_pq(&ca, &p, &q).matrix;
        let nabla = FormMatrix::from_fn(m, m, dim, |i, j| nabla_cone.get(i, j).embed(dim, &cone_map));
        let map: Vec<usize> = (0..2 * n).collect();
        let mut images: Vec<RForm> = alg.generator_differentials().iter().map(|f| lift(f).embed(dim, &map)).collect();
        let mut dphi = Form::zero(dim);
        for i in 0..n {
            dphi.add_term((1u64 << i) | (1u64 << (n + i)), TrigLaurent::constant(2.0));
        }
        images.push(dphi);
        images.push(Form::zero(dim));
        let psi = Form::generator(dim, m - 1);
        for j in 0..m {
            let mut dd = -&(&psi ^ &Form::generator(dim, m + j));
            for k in 0..m {
                dd.add_assign(&-&(&Form::generator(dim, m + k) ^ nabla.get(k, j)));
            }
            images.push(dd);
        }
        let t_form = psi.mul_coeff(&TrigLaurent::t_pow(1));
        let tau_form = &Form::generator(dim, 2 * n) - &lift(&cand.kappa).embed(dim, &map).scale(2.0);
        Ok(Self { n, dga: Dga::new(images, t_form, tau_form), nabla })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `4n + 4`.
    pub fn dim(&self) -> usize {
        4 * self.n + 4
    }

    fn m(&self) -> usize {
        2 * self.n + 2
    }

    pub fn phi(&self) -> usize {
        2 * self.n
    }

    pub fn psi(&self) -> usize {
        2 * self.n + 1
    }

    /// Index of `δ̃_j`.
    pub fn delta(&self, j: usize) -> usize {
        self.m() + j
    }

    pub fn dga(&self) -> &Dga {
        &self.dga
    }

    /// Special connection matrix of the cone, in twist-frame generators.
    pub fn nabla(&self) -> &RMatrix {
        &self.nabla
    }

    pub fn generator(&self, i: usize) -> RForm {
        Form::generator(self.dim(), i)
    }

    /// `t` times generator `i`.
    pub fn hat(&self, i: usize) -> RForm {
        self.generator(i).mul_coeff(&TrigLaurent::t_pow(1))
    }

    /// Pairings of the lifted conic symmetry `X̃`: only `φ` pairs nontrivially.
    pub fn x_pairing(&self) -> Vec<(usize, TrigLaurent)> {
        vec![(self.phi(), TrigLaurent::constant(1.0))]
    }

    pub fn lie_derivative(&self, x: &RForm) -> RForm {
        self.dga.lie_derivative(x, &self.x_pairing())
    }

    /// `(2/t²) F`.
    pub fn twist_curvature(&self) -> RForm {
        hk_forms(self).f.mul_coeff(&TrigLaurent::t_pow(-2)).scale(2.0)
    }

    /// `E(θ) = cos θ · I + sin θ · 𝐢` with `θ = sτ`, entries in the coefficient ring.
    pub fn rotation(&self, s: i32) -> Vec<Vec<TrigLaurent>> {
        let i_mat = complex_unit(self.n);
        let m = self.m();
        let (c, sn) = (TrigLaurent::cos_multiple(s), TrigLaurent::sin_multiple(s));
        (0..m)
            .map(|j| {
                (0..m)
                    .map(|k| {
                        let mut e = sn.scale(i_mat[j][k]);
                        if j == k {
                            e = e.add(&c);
                        }
                        e
                    })
                    .collect()
            })
            .collect()
    }

    /// Invariant fibre coframe `δ = δ̃ · E(−τ)`.
    pub fn delta_forms(&self) -> Vec<RForm> {
        let e = self.rotation(-1);
        let m = self.m();
        (0..m)
            .map(|j| {
                let mut f = Form::zero(self.dim());
                for (k, row) in e.iter().enumerate() {
                    f.add_term(1u64 << self.delta(k), row[j].clone());
                }
                f
            })
            .collect()
    }

    /// Rewrites a form in `δ̃` as a form in `δ`, using `δ̃ = δ · E(τ)`.
    pub fn to_delta_frame(&self, x: &RForm) -> RForm {
        let e = self.rotation(1);
        let m = self.m();
        let mut images: Vec<RForm> = (0..m).map(|i| self.generator(i)).collect();
        for k in 0..m {
            let mut f = Form::zero(self.dim());
            for (j, row) in e.iter().enumerate() {
                f.add_term(1u64 << self.delta(j), row[k].clone());
            }
            images.push(f);
        }
        x.substitute(&images)
    }

    /// `d_Q β = dβ + (2/t²) F ∧ (X̃ ⌟ β)`, defined on `X̃`-invariant forms.
    pub fn twist_differential(&self, beta: &RForm) -> Result<RForm> {
        let residual = self.lie_derivative(beta).max_abs();
        if residual > TWIST_TOL {
            return Err(Error::NotInvariant { residual });
        }
        let mut out = self.dga.d(beta);
        out.add_assign(&(&self.twist_curvature() ^ &beta.contract(&self.x_pairing())));
        Ok(out)
    }

    /// `d∘d` on the frame before twisting.
    pub fn d_squared_residual(&self) -> f64 {
        (0..self.dim()).map(|i| self.dga.d(self.dga.generator_differential(i)).max_abs()).fold(0.0, f64::max)
    }
}

/// Forms of the hyperKähler structure on the cotangent bundle, in the
/// twist frame. Metrics are diagonal in the hatted coframe and stored as
/// their diagonal in tilde generators.
#[derive(Clone, Debug)]
pub struct HkForms {
    pub g_h: Vec<TrigLaurent>,
    pub omega_i: RForm,
    pub omega_j: RForm,
    pub omega_k: RForm,
    pub g_n: Vec<TrigLaurent>,
    pub f: RForm,
}

pub fn hk_forms(tf: &TwistFrame) -> HkForms {
    let n = tf.n;
    let m = tf.m();
    let dim = tf.dim();
    let h = |i: usize| tf.hat(i);
    let (a, b, ph, ps) = (|i| h(i), |i| h(n + i), h(2 * n), h(2 * n + 1));
    let (ca, cb, cph, cps) = (|i| h(m + i), |i| h(m + n + i), h(m + 2 * n), h(m + 2 * n + 1));
    let mut omega_i = &(&ph ^ &ps).scale(-1.0) - &(&cph ^ &cps);
    let mut omega_j = &(&cph ^ &ph) + &(&cps ^ &ps);
    let mut omega_k = &(&cph ^ &ps) - &(&cps ^ &ph);
    let mut f = &(&ph ^ &ps) + &(&cph ^ &cps);
    for i in 0..n {
        omega_i.add_assign(&(&a(i) ^ &b(i)));
        omega_i.add_assign(&(&ca(i) ^ &cb(i)));
        omega_j.add_assign(&(&ca(i) ^ &a(i)));
        omega_j.add_assign(&(&cb(i) ^ &b(i)));
        omega_k.add_assign(&(&ca(i) ^ &b(i)));
        omega_k.add_assign(&-&(&cb(i) ^ &a(i)));
        f.add_assign(&-&(&a(i) ^ &b(i)));
        f.add_assign(&-&(&ca(i) ^ &cb(i)));
    }
    let t2 = TrigLaurent::t_pow(2);
    let g_h = (0..dim).map(|i| if i % m < 2 * n { t2.clone() } else { t2.scale(-1.0) }).collect();
    // (2/t²) · t² on every square
    let g_n = vec![TrigLaurent::constant(2.0); dim];
    HkForms { g_h, omega_i, omega_j, omega_k, g_n, f }
}

/// Output of the c-map.
#[derive(Clone, Debug)]
pub struct QkStructure {
    pub algebra: LieAlgebra,
    pub labels: Vec<String>,
    /// Diagonal of `g_N` in the output coframe at `t = 1`.
    pub metric: Vec<f64>,
    pub omega_i: Form<f64>,
    pub omega_j: Form<f64>,
    pub omega_k: Form<f64>,
    /// Largest `t`/`τ`-dependent coefficient met while reading off the differentials.
    pub constancy_residual: f64,
}

/// Coframe labels `a_i, b_i, phi, psi, A_i, B_i, Phi, Psi` (1-based indices).
pub fn output_labels(n: usize) -> Vec<String> {
    let mut out = Vec::new();
    for (lo, hi) in [("a", "b"), ("A", "B")] {
        out.extend((1..=n).map(|i| format!("{lo}{i}")));
        out.extend((1..=n).map(|i| format!("{hi}{i}")));
        if lo == "a" {
            out.extend(["phi".to_string(), "psi".to_string()]);
        } else {
            out.extend(["Phi".to_string(), "Psi".to_string()]);
        }
    }
    out
}

/// Twisted differentials of the invariant coframe `(ã, b̃, φ, ψ̃, δ)`,
/// expressed in that coframe.
pub fn twisted_coframe_differentials(tf: &TwistFrame) -> Result<Vec<RForm>> {
    let m = tf.m();
    let mut out = Vec::with_capacity(tf.dim());
    for i in 0..m {
        out.push(tf.to_delta_frame(&tf.twist_differential(&tf.generator(i))?));
    }
    for delta in tf.delta_forms() {
        out.push(tf.to_delta_frame(&tf.twist_differential(&delta)?));
    }
    Ok(out)
}

/// Applies the c-map to a verified special Kähler candidate.
pub fn qk_algebra(alg: &LieAlgebra, basis: &AdaptedBasis, cand: &PskCandidate) -> Result<QkStructure> {
    cand.check_primitive(alg, basis)?;
    let conn = levi_civita(alg, basis)?;
    let curv = curvature(&conn, alg);
    let residual = intrinsic_report(alg, basis, &conn, &curv, cand).max_primary();
    if residual > PSK_INPUT_TOL {
        return Err(Error::NotPsk { residual });
    }
    let tf = TwistFrame::new(alg, basis, cand)?;
    let diffs = twisted_coframe_differentials(&tf)?;
    let dim = tf.dim();
    let mut constancy_residual: f64 = 0.0;
    let mut brackets = Vec::new();
    for (k, f) in diffs.iter().enumerate() {
        for (blade, c) in f.terms() {
            constancy_residual = constancy_residual.max(c.nonconstant_max());
            let idx = blade_indices(blade);
            let v = c.constant_part();
            if idx.len() == 2 && v.abs() > 1e-14 {
                brackets.push((idx[0], idx[1], k, -v));
            }
        }
    }
    if constancy_residual > TWIST_TOL {
        return Err(Error::NonConstant { residual: constancy_residual });
    }
    let algebra = LieAlgebra::from_brackets(dim, &brackets)?;
    let (omega_i, omega_j, omega_k) = qk_triple(tf.n);
    Ok(QkStructure {
        algebra,
        labels: output_labels(tf.n),
        metric: hk_forms(&tf).g_n.iter().map(|c| c.eval(1.0, 0.0)).collect(),
        omega_i,
        omega_j,
        omega_k,
        constancy_residual,
    })
}

/// Almost-hypercomplex triple of two-forms on the output coframe, compatible
/// with the orientation fixed by the fibre coframe `δ`.
pub fn qk_triple(n: usize) -> (Form<f64>, Form<f64>, Form<f64>) {
    let m = 2 * n + 2;
    let dim = 2 * m;
    let pair = |x: usize, y: usize, c: f64| Form::monomial(dim, &[x, y], c);
    let (a, b, ph, ps) = (|i| i, |i| n + i, 2 * n, 2 * n + 1);
    let (ca, cb, cph, cps) = (|i| m + i, |i| m + n + i, m + 2 * n, m + 2 * n + 1);
    let mut wi = &pair(ph, ps, 1.0) + &pair(cph, cps, -1.0);
    let mut wj = &pair(ph, cph, 1.0) + &pair(ps, cps, 1.0);
    let mut wk = &pair(ph, cps, 1.0) + &pair(ps, cph, -1.0);
    for i in 0..n {
        wi.add_assign(&pair(a(i), b(i), 1.0));
        wi.add_assign(&pair(ca(i), cb(i), -1.0));
        wj.add_assign(&pair(ca(i), a(i), 1.0));
        wj.add_assign(&pair(cb(i), b(i), 1.0));
        wk.add_assign(&pair(b(i), ca(i), 1.0));
        wk.add_assign(&pair(a(i), cb(i), -1.0));
    }
    (wi, wj, wk)
}

/// Antisymmetric matrix `Ω_{ij} = ω(e_i, e_j)` of a two-form.
pub fn two_form_matrix(w: &Form<f64>) -> DMatrix<f64> {
    let m = w.dim();
    let mut out = DMatrix::zeros(m, m);
    for (b, c) in w.terms() {
        let idx = blade_indices(b);
        out[(idx[0], idx[1])] = *c;
        out[(idx[1], idx[0])] = -*c;
    }
    out
}

/// Diagnostics of a c-map output.
#[derive(Clone, Debug, PartialEq)]
pub struct QkReport {
    pub dimension: usize,
    /// `d∘d` on the output generators, equivalently the Jacobi identity.
    pub jacobi: f64,
    pub metric_min_eigenvalue: f64,
    pub sp1_fit: f64,
    pub completely_solvable: bool,
    pub derived_dims: Vec<usize>,
    /// Eigenvalues of the Killing form in a `g_N`-orthonormal basis, ascending.
    pub killing_spectrum: Vec<f64>,
    /// `‖Ric − (s/dim) g‖` for the metric `g_N`.
    pub einstein: f64,
    pub scalar_curvature: f64,
}

impl QkReport {
    pub fn passes(&self) -> bool {
        self.jacobi < 1e-9 && self.metric_min_eigenvalue > 0.0 && self.sp1_fit < 1e-8 && self.completely_solvable
    }

    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("jacobi", self.jacobi),
            ("metric_min_eigenvalue", self.metric_min_eigenvalue),
            ("sp1_fit", self.sp1_fit),
            ("einstein", self.einstein),
            ("scalar_curvature", self.scalar_curvature),
        ]
    }
}

pub fn qk_verify(q: &QkStructure) -> QkReport {
    let alg = &q.algebra;
    let dim = alg.dim();
    let jacobi = alg
        .generator_differentials()
        .iter()
        .map(|f| alg.ce_differential(f).max_abs())
        .fold(alg.jacobi_residual(), f64::max);
    let gram = DMatrix::from_diagonal(&DVector::from_column_slice(&q.metric));
    let metric_min_eigenvalue = SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let ortho = orthonormal_algebra(alg, &q.metric);
    let killing = ortho.killing_form();
    let mut killing_spectrum: Vec<f64> = SymmetricEigen::new(&killing + killing.transpose()).eigenvalues.iter().map(|v| v / 2.0).collect();
    killing_spectrum.sort_by(f64::total_cmp);
    let ric = ricci(&ortho);
    let scalar_curvature = ric.trace();
    let einstein = (&ric - DMatrix::identity(dim, dim) * (scalar_curvature / dim as f64)).amax();
    let derived_dims = alg.derived_series_dims();
    QkReport {
        dimension: dim,
        jacobi,
        metric_min_eigenvalue,
        sp1_fit: sp1_fit(alg, [&q.omega_i, &q.omega_j, &q.omega_k]),
        completely_solvable: completely_solvable(alg),
        derived_dims,
        killing_spectrum,
        einstein,
        scalar_curvature,
    }
}

/// Same algebra in the basis `e_i / √g_ii` (diagonal metric).
fn orthonormal_algebra(alg: &LieAlgebra, metric: &[f64]) -> LieAlgebra {
    let s: Vec<f64> = metric.iter().map(|g| g.sqrt()).collect();
    let brackets: Vec<_> = alg.brackets().into_iter().map(|(i, j, k, c)| (i, j, k, c * s[k] / (s[i] * s[j]))).collect();
    LieAlgebra::from_brackets(alg.dim(), &brackets).expect("rescaling preserves shape")
}

/// Ricci tensor of the left-invariant metric making the basis orthonormal.
pub fn ricci(alg: &LieAlgebra) -> DMatrix<f64> {
    let m = alg.dim();
    let w = koszul_matrix(alg);
    let omega = &w.map(|f| alg.ce_differential(f)) + &(&w ^ &w);
    // Ric(e_y, e_z) = Σ_i Ω^i_z(e_i, e_y)
    let mut ric = DMatrix::zeros(m, m);
    for y in 0..m {
        for z in 0..m {
            let mut s = 0.0;
            for i in 0..m {
                if i != y {
                    let c = omega.get(i, z).coeff(&[i, y]);
                    s += if i < y { c } else { -omega.get(i, z).coeff(&[y, i]) };
                }
            }
            ric[(y, z)] = s;
        }
    }
    ric
}

/// Least-squares residual of `dω_c = α_j∧ω_k − α_k∧ω_j` over cyclic `(c, j, k)`.
pub fn sp1_fit(alg: &LieAlgebra, omegas: [&Form<f64>; 3]) -> f64 {
    let m = alg.dim();
    let blades = blades_of_degree(m, 3);
    let rows = blades.len();
    let mut mat = DMatrix::zeros(3 * rows, 3 * m);
    let mut rhs = DVector::zeros(3 * rows);
    for c in 0..3 {
        let (j, k) = ((c + 1) % 3, (c + 2) % 3);
        let dw = flatten_on(&alg.ce_differential(omegas[c]), &blades);
        for (r, v) in dw.iter().enumerate() {
            rhs[c * rows + r] = *v;
        }
        for l in 0..m {
            let e = Form::generator(m, l);
            // α_j = e^l contributes e^l∧ω_k; α_k = e^l contributes −e^l∧ω_j.
            let col_j = flatten_on(&(&e ^ omegas[k]), &blades);
            let col_k = flatten_on(&(&e ^ omegas[j]), &blades);
            for r in 0..rows {
                mat[(c * rows + r, j * m + l)] += col_j[r];
                mat[(c * rows + r, k * m + l)] -= col_k[r];
            }
        }
    }
    let svd = mat.clone().svd(true, true);
    match svd.solve(&rhs, 1e-10) {
        Ok(x) => (&mat * x - rhs).amax(),
        Err(_) => f64::INFINITY,
    }
}

const SOLVABILITY_SAMPLES: usize = 8;

/// Derived series reaches zero and every sampled `ad` has real spectrum.
///
/// Nilpotent `ad` operators are accepted outright, since their eigenvalues
/// are zero but numerically ill-conditioned. An eigenvalue off the real
/// axis by less than `1e-3` relative is accepted when the cluster around it
/// is centred on the axis, so complex pairs that close are not detected.
pub fn completely_solvable(alg: &LieAlgebra) -> bool {
    let m = alg.dim();
    if alg.derived_series_dims().last() != Some(&0) {
        return false;
    }
    let mut samples: Vec<Vec<f64>> = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..SOLVABILITY_SAMPLES {
        samples.push((0..m).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    samples.iter().all(|x| real_spectrum(&alg.ad(x)))
}

fn real_spectrum(a: &DMatrix<f64>) -> bool {
    let m = a.nrows();
    let scale = a.amax().max(1e-300);
    let mut power = a / scale;
    for _ in 1..m {
        power = &power * (a / scale);
    }
    if power.amax() < 1e-12 {
        return true;
    }
    let eig = a.complex_eigenvalues();
    let tol = 1e-8 * (1.0 + scale);
    let radius = 1e-3 * (1.0 + scale);
    eig.iter().all(|z| {
        if z.im.abs() <= tol {
            return true;
        }
        if z.im.abs() > radius {
            return false;
        }
        // A defective real eigenvalue splits into a small symmetric cluster.
        let cluster: Vec<_> = eig.iter().filter(|w| (*w - z).norm() < 2.0 * radius).collect();
        let mean_im = cluster.iter().map(|w| w.im).sum::<f64>() / cluster.len() as f64;
        mean_im.abs() <= tol
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{ch1, ch1_candidate, ch1_cubed_candidate, ch1_product, ch1_pair_algebra, ch1_pair_candidate};

    fn run(alg: &LieAlgebra, cand: &PskCandidate) -> (QkStructure, QkReport) {
        let basis = AdaptedBasis::new(cand.n());
        let q = qk_algebra(alg, &basis, cand).unwrap();
        let r = qk_verify(&q);
        (q, r)
    }

    fn ch1_pair(c: f64) -> (LieAlgebra, PskCandidate) {
        let x = ((4.0 - c * c) / 2.0).max(0.0).sqrt();
        (ch1(c), ch1_candidate(c, x))
    }

    #[test]
    fn frame_is_a_dga() {
        let tf = TwistFrame::new(&ch1_pair_algebra(), &AdaptedBasis::new(2), &ch1_pair_candidate()).unwrap();
        assert!(tf.d_squared_residual() < 1e-12);
        assert!(tf.dga().d_squared_residual() < 1e-12);
    }

    #[test]
    fn hk_form_relations() {
        let tf = TwistFrame::new(&ch1_pair_algebra(), &AdaptedBasis::new(2), &ch1_pair_candidate()).unwrap();
        let hk = hk_forms(&tf);
        assert_eq!((&hk.f + &hk.omega_i).max_abs(), 0.0);
        assert!(tf.lie_derivative(&hk.omega_i).max_abs() < 1e-12);
        assert!((&tf.lie_derivative(&hk.omega_j) - &hk.omega_k).max_abs() < 1e-12);
        assert!(hk.g_n.iter().all(|g| g.eval(1.0, 0.0) == 2.0));
        // ω_I(Â_1, B̂_1) at t = 1
        let ab = hk.omega_i.coeff(&[tf.delta(0), tf.delta(2)]);
        assert_eq!(ab.eval(1.0, 0.3), 1.0);
    }

    #[test]
    fn twisted_differentials_of_base_coframe() {
        let tf = TwistFrame::new(&ch1_pair_algebra(), &AdaptedBasis::new(2), &ch1_pair_candidate()).unwrap();
        assert!(tf.twist_differential(&tf.generator(tf.psi())).unwrap().max_abs() < 1e-15);
        let dq_phi = tf.twist_differential(&tf.generator(tf.phi())).unwrap();
        let g = |i: usize| tf.generator(i);
        let mut expected = &g(tf.phi()) ^ &g(tf.psi());
        expected.add_assign(&(&g(tf.delta(4)) ^ &g(tf.delta(5))));
        for i in 0..2 {
            expected.add_assign(&-&(&g(tf.delta(i)) ^ &g(tf.delta(2 + i))));
        }
        assert!((&dq_phi - &expected.scale(2.0)).max_abs() < 1e-14);
        let da = tf.twist_differential(&g(0)).unwrap();
        assert_eq!(da, tf.dga().d(&g(0)));
    }

    #[test]
    fn raw_fibre_coframe_is_not_invariant() {
        let tf = TwistFrame::new(&ch1_pair_algebra(), &AdaptedBasis::new(2), &ch1_pair_candidate()).unwrap();
        let err = tf.twist_differential(&tf.generator(tf.delta(0))).unwrap_err();
        assert!(matches!(err, Error::NotInvariant { .. }));
        for d in tf.delta_forms() {
            assert!(tf.lie_derivative(&d).max_abs() < 1e-12);
        }
    }

    #[test]
    fn triple_is_quaternionic() {
        let (wi, wj, wk) = qk_triple(2);
        let (i, j, k) = (two_form_matrix(&wi), two_form_matrix(&wj), two_form_matrix(&wk));
        let id = DMatrix::<f64>::identity(12, 12);
        for x in [&i, &j, &k] {
            assert!((x * x + &id).amax() < 1e-15);
        }
        assert!((&i * &j - &k).amax() < 1e-15 || (&i * &j + &k).amax() < 1e-15);
        assert!((&i * &j + &j * &i).amax() < 1e-15);
    }

    #[test]
    fn ricci_of_hyperbolic_plane() {
        // db = c a∧b has Gaussian curvature −c²
        for c in [1.0, 2.0] {
            let ric = ricci(&ch1(c));
            assert!((&ric + DMatrix::<f64>::identity(2, 2) * (c * c)).amax() < 1e-12);
        }
    }

    #[test]
    fn dimensions_and_checks() {
        let cases = vec![
            (ch1_pair(2.0), 8),
            (ch1_pair(2.0 / 3f64.sqrt()), 8),
            ((ch1_pair_algebra(), ch1_pair_candidate()), 12),
            ((ch1_product(&[2.0; 3]), ch1_cubed_candidate()), 16),
        ];
        for ((alg, cand), dim) in cases {
            let (q, r) = run(&alg, &cand);
            assert_eq!(q.algebra.dim(), dim);
            assert!(r.jacobi < 1e-10, "{r:?}");
            assert!(r.sp1_fit < 1e-8, "{r:?}");
            assert!(r.completely_solvable, "{r:?}");
            assert!(r.metric_min_eigenvalue > 0.1);
            assert!(r.einstein < 1e-8, "{r:?}");
            assert!(r.passes());
        }
    }

    #[test]
    fn two_ch1_structures_differ() {
        let (_, r2) = run(&ch1_pair(2.0).0, &ch1_pair(2.0).1);
        let (a, c) = ch1_pair(2.0 / 3f64.sqrt());
        let (_, r3) = run(&a, &c);
        let spec_gap = r2.killing_spectrum.iter().zip(&r3.killing_spectrum).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(r2.derived_dims != r3.derived_dims || spec_gap > 1e-3);
    }

    #[test]
    fn gauge_rotation_gives_same_invariants() {
        let alg = ch1_pair_algebra();
        let (_, r0) = run(&alg, &ch1_pair_candidate());
        let (_, r1) = run(&alg, &ch1_pair_candidate().rotated(0.83));
        assert_eq!(r0.derived_dims, r1.derived_dims);
        for (x, y) in r0.killing_spectrum.iter().zip(&r1.killing_spectrum) {
            assert!((x - y).abs() < 1e-8);
        }
        assert!((r0.scalar_curvature - r1.scalar_curvature).abs() < 1e-8);
    }

    #[test]
    fn perturbed_output_is_flagged() {
        let (alg, cand) = ch1_pair(2.0);
        let (q, r) = run(&alg, &cand);
        let mut br = q.algebra.brackets();
        br[0].3 += 0.3;
        let bad = QkStructure { algebra: LieAlgebra::from_brackets(8, &br).unwrap(), ..q };
        let rb = qk_verify(&bad);
        assert!(rb.jacobi > 1e-3);
        assert!(rb.sp1_fit > r.sp1_fit);
        assert!(!rb.passes());
    }

    #[test]
    fn rotation_algebra_is_not_completely_solvable() {
        let e2 = LieAlgebra::new(3, &[(0, 1, 2, 1.0), (0, 2, 1, -1.0)]).unwrap();
        assert!(!completely_solvable(&e2));
        let heis = LieAlgebra::new(3, &[(0, 1, 2, 1.0)]).unwrap();
        assert!(completely_solvable(&heis));
        assert!(completely_solvable(&ch1(2.0)));
    }

    #[test]
    fn non_solution_is_rejected() {
        let alg = ch1(1.0);
        let err = qk_algebra(&alg, &AdaptedBasis::new(1), &ch1_candidate(1.0, 0.0)).unwrap_err();
        assert!(matches!(err, Error::NotPsk { .. }));
    }
}
