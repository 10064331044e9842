//! Multi-start damped least squares for the intrinsic equations.

mod lm;
mod model;
mod scan;

pub use lm::{levenberg_marquardt, LeastSquares, LmOptions, LmOutcome};
pub use model::QuadraticModel;
pub use scan::{scan_curvature, scan_values, ScanReport};

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::connection::{curvature, kahler_check, levi_civita, ConnectionData, CurvatureData};
use crate::error::{Error, Result};
use crate::exterior::{blades_of_degree, Form, FormMatrix};
use crate::intrinsic::{
    build_pq, dpq_matrices, integrability_matrices, intrinsic_report, sorted_triples, tpq_matrix, wpq_matrix,
    PskCandidate, SymTensor3,
};
use crate::lie::{flatten_on, AdaptedBasis, LieAlgebra};

/// Relative size below which a triple is not used as the gauge anchor.
pub const GAUGE_ANCHOR_REL: f64 = 1e-6;
/// Orbit distance separating two reported solutions.
pub const ORBIT_SEPARATION: f64 = 1e-6;

/// Fixed data of the problem: the Kähler algebra, its Levi-Civita data and
/// the affine space of primitives `κ`.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub algebra: LieAlgebra,
    pub basis: AdaptedBasis,
    pub connection: ConnectionData,
    pub curvature: CurvatureData,
    /// Particular primitive of the Kähler form; `None` in κ-free mode.
    pub kappa0: Option<Form<f64>>,
    /// Closed one-forms, added to `kappa0` with free coefficients.
    pub kernel: Vec<Form<f64>>,
}

impl Geometry {
    /// Requires a Kähler algebra with exact Kähler form.
    pub fn new(algebra: LieAlgebra) -> Result<Self> {
        let mut g = Self::without_primitive(algebra)?;
        let prim = g.algebra.solve_primitive(&g.basis.kahler_form())?;
        g.kappa0 = Some(prim.kappa);
        g.kernel = prim.kernel;
        Ok(g)
    }

    /// κ-free mode: only the equations not involving `κ` and their
    /// integrability conditions are imposed.
    pub fn without_primitive(algebra: LieAlgebra) -> Result<Self> {
        if algebra.dim() % 2 != 0 || algebra.dim() == 0 {
            return Err(Error::DimensionMismatch(algebra.dim(), algebra.dim() + 1));
        }
        let basis = AdaptedBasis::new(algebra.dim() / 2);
        let report = kahler_check(&algebra, &basis)?;
        if !report.is_kahler() {
            return Err(Error::NotKahler { residual: report.closedness.max(report.shape_residual) });
        }
        let connection = levi_civita(&algebra, &basis)?;
        let curvature = curvature(&connection, &algebra);
        Ok(Self { algebra, basis, connection, curvature, kappa0: None, kernel: Vec::new() })
    }

    /// [`Geometry::new`], falling back to κ-free mode when the Kähler form is not exact.
    pub fn with_fallback(algebra: LieAlgebra) -> Result<Self> {
        match Self::new(algebra.clone()) {
            Err(Error::NotExact { .. }) => Self::without_primitive(algebra),
            other => other,
        }
    }

    pub fn n(&self) -> usize {
        self.basis.n
    }

    pub fn is_kappa_free(&self) -> bool {
        self.kappa0.is_none()
    }

    fn triples(&self) -> usize {
        sorted_triples(self.n()).len()
    }

    pub fn n_unknowns(&self) -> usize {
        2 * self.triples() + self.kernel.len()
    }

    pub fn unpack(&self, x: &[f64]) -> PskCandidate {
        let (n, t) = (self.n(), self.triples());
        let sa = SymTensor3::from_values(n, x[..t].to_vec());
        let sb = SymTensor3::from_values(n, x[t..2 * t].to_vec());
        let mut kappa = self.kappa0.clone().unwrap_or_else(|| Form::zero(self.algebra.dim()));
        for (c, k) in x[2 * t..].iter().zip(&self.kernel) {
            kappa.add_scaled(k, *c);
        }
        PskCandidate::new(sa, sb, kappa)
    }

    /// Inverse of [`Geometry::unpack`]; `κ − κ₀` is projected onto the kernel.
    pub fn pack(&self, cand: &PskCandidate) -> Vec<f64> {
        let mut x: Vec<f64> = cand.sa.values().iter().chain(cand.sb.values()).copied().collect();
        if let Some(k0) = &self.kappa0 {
            let diff = (&cand.kappa - k0).one_form_coeffs();
            x.extend(kernel_coordinates(&self.kernel, &diff));
        }
        x
    }

    /// Every residual entry as a function of the unknowns.
    pub fn residual_at(&self, x: &[f64]) -> Vec<f64> {
        residual_vector(&self.unpack(x), self)
    }

    pub fn model(&self) -> QuadraticModel {
        QuadraticModel::build(self.n_unknowns(), |x| self.residual_at(x))
    }
}

fn kernel_coordinates(kernel: &[Form<f64>], v: &[f64]) -> Vec<f64> {
    if kernel.is_empty() {
        return Vec::new();
    }
    let m = v.len();
    let k = nalgebra::DMatrix::from_fn(m, kernel.len(), |i, j| kernel[j].one_form_coeffs()[i]);
    let rhs = DVector::from_column_slice(v);
    k.svd(true, true).solve(&rhs, 1e-12).map(|s| s.iter().copied().collect()).unwrap_or_else(|_| vec![0.0; kernel.len()])
}

fn flatten_matrix(m: &FormMatrix, blades: &[u64], out: &mut Vec<f64>) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            out.extend(flatten_on(m.get(i, j), blades));
        }
    }
}

/// Stacked residuals `[T-PQ, W-PQ, dP, dQ]`, each matrix row-major and each
/// entry over two-blades in lexicographic order. In κ-free mode the last
/// two blocks are the integrability three-forms instead.
pub fn residual_vector(cand: &PskCandidate, geom: &Geometry) -> Vec<f64> {
    let dim = geom.algebra.dim();
    let two = blades_of_degree(dim, 2);
    let (p, q) = build_pq(cand);
    let mut out = Vec::new();
    flatten_matrix(&tpq_matrix(&geom.curvature, &p, &q), &two, &mut out);
    flatten_matrix(&wpq_matrix(&geom.curvature, &p, &q), &two, &mut out);
    if geom.is_kappa_free() {
        let three = blades_of_degree(dim, 3);
        let (i1, i2) = integrability_matrices(&geom.curvature, &p, &q, &geom.basis);
        flatten_matrix(&i1, &three, &mut out);
        flatten_matrix(&i2, &three, &mut out);
    } else {
        let (ep, eq) = dpq_matrices(&p, &q, &cand.kappa, &geom.connection, &geom.algebra);
        flatten_matrix(&ep, &two, &mut out);
        flatten_matrix(&eq, &two, &mut out);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub starts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub lm_damping_init: f64,
    pub success_threshold: f64,
    pub infeasibility_floor: f64,
    pub init_scale: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            seed: 0,
            max_iters: 500,
            lm_damping_init: 1e-3,
            success_threshold: 1e-8,
            infeasibility_floor: 1e-2,
            init_scale: 1.0,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [self.lm_damping_init, self.success_threshold, self.infeasibility_floor, self.init_scale];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("thresholds and scales must be positive".into()));
        }
        if self.success_threshold >= self.infeasibility_floor {
            return Err(Error::Config("success_threshold must be below infeasibility_floor".into()));
        }
        if self.starts == 0 || self.max_iters == 0 {
            return Err(Error::Config("starts and max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    LikelyInfeasible,
    Inconclusive,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Solved => "Solved",
            SolveStatus::LikelyInfeasible => "LikelyInfeasible",
            SolveStatus::Inconclusive => "Inconclusive",
        }
    }
}

/// Rotation applied after solving: `candidate = R_angle(raw)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaugeNote {
    pub angle: f64,
    /// Triple whose coefficient was made real and nonnegative.
    pub anchor: Option<(usize, usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveTrace {
    pub starts: usize,
    pub best_start: usize,
    /// Starts ending below the success threshold.
    pub solved_starts: usize,
    /// Starts ending above the infeasibility floor.
    pub infeasible_starts: usize,
    pub total_iterations: usize,
    /// Final residual of every start, in start order.
    pub start_residuals: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub best_residual: f64,
    pub candidate: PskCandidate,
    pub gauge: GaugeNote,
    pub breakdown: Vec<(&'static str, f64)>,
    pub trace: SolveTrace,
    /// Gauge-normalized representatives of the distinct orbits among solved starts.
    pub orbits: Vec<PskCandidate>,
    pub kappa_free: bool,
}

/// Gauge-normalizes `cand` so the first significant triple is real and nonnegative.
pub fn normalize_gauge(cand: &PskCandidate) -> (PskCandidate, GaugeNote) {
    let (sa, sb) = (cand.sa.values(), cand.sb.values());
    let mags: Vec<f64> = sa.iter().zip(sb).map(|(a, b)| a.hypot(*b)).collect();
    let max = mags.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return (cand.clone(), GaugeNote { angle: 0.0, anchor: None });
    }
    let idx = mags.iter().position(|m| *m >= GAUGE_ANCHOR_REL * max).expect("max is attained");
    let angle = sb[idx].atan2(sa[idx]);
    let mut out = cand.rotated(angle);
    // Remove rounding in the anchor's imaginary part.
    let (i, j, k) = sorted_triples(cand.n())[idx];
    out.sb.set(i, j, k, 0.0);
    (out, GaugeNote { angle, anchor: Some((i, j, k)) })
}

/// `min_s ‖R_s(c1) − c2‖` over the coefficients of `q` on all ordered triples.
pub fn certify_gauge_orbit(c1: &PskCandidate, c2: &PskCandidate) -> f64 {
    let a = c1.sa.full_dot(&c2.sa) + c1.sb.full_dot(&c2.sb);
    let b = c1.sb.full_dot(&c2.sa) - c1.sa.full_dot(&c2.sb);
    let s = b.atan2(a);
    let r = c1.rotated(s);
    let da = r.sa.combine(1.0, &c2.sa, -1.0);
    let db = r.sb.combine(1.0, &c2.sb, -1.0);
    (da.full_dot(&da) + db.full_dot(&db)).max(0.0).sqrt()
}

fn start_point(cfg: &SolveConfig, start: usize, len: usize) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(start as u64);
    DVector::from_iterator(len, (0..len).map(|_| rng.gen_range(-cfg.init_scale..=cfg.init_scale)))
}

/// Multi-start Levenberg–Marquardt on the quadratic residual system.
pub fn solve(geom: &Geometry, cfg: &SolveConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let model = geom.model();
    solve_with_model(geom, &model, cfg)
}

pub(crate) fn solve_with_model(geom: &Geometry, model: &QuadraticModel, cfg: &SolveConfig) -> Result<SolveResult> {
    let opts = LmOptions { max_iters: cfg.max_iters, damping_init: cfg.lm_damping_init, target: cfg.success_threshold * 1e-4 };
    let nvar = geom.n_unknowns();
    let outcomes: Vec<LmOutcome> = (0..cfg.starts)
        .into_par_iter()
        .map(|s| levenberg_marquardt(model, start_point(cfg, s, nvar), &opts))
        .collect();
    // Recompute each final residual from the form-level evaluator.
    let finals: Vec<f64> = outcomes
        .par_iter()
        .map(|o| geom.residual_at(o.x.as_slice()).iter().fold(0.0f64, |m, v| m.max(v.abs())))
        .collect();
    let (best_start, best_residual) = finals
        .iter()
        .copied()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)))
        .expect("at least one start");
    let solved_starts = finals.iter().filter(|r| **r < cfg.success_threshold).count();
    let infeasible_starts = finals.iter().filter(|r| **r > cfg.infeasibility_floor).count();
    let status = if infeasible_starts == cfg.starts {
        SolveStatus::LikelyInfeasible
    } else if best_residual < cfg.success_threshold && !geom.is_kappa_free() {
        SolveStatus::Solved
    } else {
        SolveStatus::Inconclusive
    };
    let (candidate, gauge) = normalize_gauge(&geom.unpack(outcomes[best_start].x.as_slice()));
    let mut orbits: Vec<PskCandidate> = Vec::new();
    for (o, r) in outcomes.iter().zip(&finals) {
        if *r >= cfg.success_threshold {
            continue;
        }
        let (c, _) = normalize_gauge(&geom.unpack(o.x.as_slice()));
        if orbits.iter().all(|k| certify_gauge_orbit(k, &c) > ORBIT_SEPARATION) {
            orbits.push(c);
        }
    }
    let report = intrinsic_report(&geom.algebra, &geom.basis, &geom.connection, &geom.curvature, &candidate);
    let breakdown = if geom.is_kappa_free() {
        report.named().into_iter().filter(|(k, _)| *k != "d_p" && *k != "d_q").collect()
    } else {
        report.named()
    };
    let trace = SolveTrace {
        starts: cfg.starts,
        best_start,
        solved_starts,
        infeasible_starts,
        total_iterations: outcomes.iter().map(|o| o.iterations).sum(),
        start_residuals: finals,
    };
    Ok(SolveResult {
        status,
        best_residual,
        candidate,
        gauge,
        breakdown,
        trace,
        orbits,
        kappa_free: geom.is_kappa_free(),
    })
}
