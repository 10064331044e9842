//! JSON file formats, reports and the command layer behind the CLI.
//!
//! Indices in files are 1-based: generators `1..=n` are `A_i`, `n+1..=2n`
//! are `B_i`, and tensor triples refer to `1..=n`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
pub use serde_json::Value as JsonValue;
use serde_json::Value;

use crate::cmap::{qk_algebra, qk_verify, QkReport, QkStructure};
use crate::cone::{verify_cone, CONE_TOL};
use crate::connection::{curvature, kahler_check, levi_civita};
use crate::error::{Error, Result};
use crate::exterior::Form;
use crate::intrinsic::{build_pq, intrinsic_report, sorted_triples, PskCandidate, SymTensor3};
use crate::lie::{AdaptedBasis, LieAlgebra};
use crate::solver::{scan_curvature, solve, Geometry, ScanReport, SolveConfig, SolveResult, SolveStatus};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Threshold for `check`: every residual must be below it.
pub const CHECK_TOL: f64 = 1e-8;
/// Placeholder substituted by the scan parameter in templates.
pub const SCAN_PLACEHOLDER: &str = "{c}";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateBlock {
    #[serde(rename = "Sa", default)]
    pub sa: Vec<(usize, usize, usize, f64)>,
    #[serde(rename = "Sb", default)]
    pub sb: Vec<(usize, usize, usize, f64)>,
    #[serde(default)]
    pub kappa: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub n: usize,
    pub brackets: Vec<(usize, usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate: Option<CandidateBlock>,
}

/// Indented JSON with arrays of scalars kept on one line.
pub fn to_json_compact<T: Serialize>(x: &T) -> String {
    let v = serde_json::to_value(x).expect("plain data serializes");
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |k: usize| "  ".repeat(k);
    match v {
        Value::Object(map) if !map.is_empty() => {
            out.push_str("{\n");
            for (i, (k, x)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(x, indent + 1, out);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
        Value::Array(items) if items.iter().any(|x| x.is_array() || x.is_object()) => {
            let flat = items.iter().all(|x| x.as_array().is_some_and(|a| a.iter().all(|y| !y.is_array() && !y.is_object())));
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                if flat {
                    out.push_str(&x.to_string());
                } else {
                    write_value(x, indent + 1, out);
                }
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        other => out.push_str(&other.to_string()),
    }
}

fn check_index(i: usize, dim: usize, what: &str) -> Result<()> {
    if i == 0 || i > dim {
        return Err(Error::Parse(format!("{what} index {i} outside 1..={dim}")));
    }
    Ok(())
}

impl AlgebraFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = 2 * self.n;
        if self.n == 0 || dim > crate::exterior::MAX_DIM {
            return Err(Error::Parse(format!("n = {} unsupported", self.n)));
        }
        for &(i, j, k, c) in &self.brackets {
            check_index(i, dim, "bracket")?;
            check_index(j, dim, "bracket")?;
            check_index(k, dim, "bracket")?;
            if i >= j {
                return Err(Error::Parse(format!("bracket [{i}, {j}] must have i < j")));
            }
            if !c.is_finite() {
                return Err(Error::Parse("non-finite structure constant".into()));
            }
        }
        if let Some(labels) = &self.labels {
            if labels.len() != dim {
                return Err(Error::Parse(format!("{} labels for {dim} generators", labels.len())));
            }
        }
        if let Some(c) = &self.candidate {
            for &(i, j, k, _) in c.sa.iter().chain(&c.sb) {
                for x in [i, j, k] {
                    check_index(x, self.n, "tensor")?;
                }
                if !(i <= j && j <= k) {
                    return Err(Error::Parse(format!("tensor triple ({i}, {j}, {k}) is not sorted")));
                }
            }
            for &(i, _) in &c.kappa {
                check_index(i, dim, "kappa")?;
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        to_json_compact(self)
    }

    /// The Lie algebra, with the Jacobi identity checked.
    pub fn algebra(&self) -> Result<LieAlgebra> {
        let br: Vec<_> = self.brackets.iter().map(|&(i, j, k, c)| (i - 1, j - 1, k - 1, c)).collect();
        LieAlgebra::new(2 * self.n, &br)
    }

    pub fn candidate(&self) -> Option<PskCandidate> {
        let c = self.candidate.as_ref()?;
        let n = self.n;
        let tensor = |entries: &[(usize, usize, usize, f64)]| {
            let mut t = SymTensor3::zeros(n);
            for &(i, j, k, v) in entries {
                t.set(i - 1, j - 1, k - 1, t.get(i - 1, j - 1, k - 1) + v);
            }
            t
        };
        let mut kappa = Form::zero(2 * n);
        for &(i, v) in &c.kappa {
            kappa.add_term(1u64 << (i - 1), v);
        }
        Some(PskCandidate::new(tensor(&c.sa), tensor(&c.sb), kappa))
    }

    pub fn from_algebra(alg: &LieAlgebra, labels: Option<Vec<String>>, cand: Option<&PskCandidate>) -> Self {
        Self {
            n: alg.dim() / 2,
            brackets: alg.brackets().into_iter().map(|(i, j, k, c)| (i + 1, j + 1, k + 1, c)).collect(),
            labels,
            candidate: cand.map(CandidateBlock::from_candidate),
        }
    }
}

impl CandidateBlock {
    pub fn from_candidate(c: &PskCandidate) -> Self {
        let triples = sorted_triples(c.n());
        let entries = |t: &SymTensor3| {
            triples
                .iter()
                .zip(t.values())
                .filter(|(_, v)| **v != 0.0)
                .map(|(&(i, j, k), v)| (i + 1, j + 1, k + 1, *v))
                .collect()
        };
        let kappa = c.kappa.one_form_coeffs().into_iter().enumerate().filter(|(_, v)| *v != 0.0).map(|(i, v)| (i + 1, v)).collect();
        Self { sa: entries(&c.sa), sb: entries(&c.sb), kappa }
    }
}

/// CLI exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExitCode {
    Ok,
    ResidualFailure,
    Parse,
    Precondition,
    NotPsk,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        match self {
            ExitCode::Ok => 0,
            ExitCode::ResidualFailure => 1,
            ExitCode::Parse => 2,
            ExitCode::Precondition => 3,
            ExitCode::NotPsk => 4,
        }
    }

    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::Parse(_) | Error::Config(_) => ExitCode::Parse,
            Error::NotPsk { .. } => ExitCode::NotPsk,
            Error::NotExact { .. }
            | Error::NotKahler { .. }
            | Error::InvalidAlgebra(_)
            | Error::DimensionMismatch(..)
            | Error::IndexOutOfRange { .. }
            | Error::BadPrimitive { .. }
            | Error::DSquaredNonzero { .. }
            | Error::StructuralEquation { .. } => ExitCode::Precondition,
            _ => ExitCode::ResidualFailure,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaugeRecord {
    pub angle: f64,
    /// 1-based triple made real and nonnegative.
    pub anchor: Option<(usize, usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub starts: usize,
    pub best_start: usize,
    pub solved_starts: usize,
    pub infeasible_starts: usize,
    pub total_iterations: usize,
}

/// Machine-readable outcome of a command. Floats are written in shortest
/// round-trip form, so they parse back to the identical value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub status: String,
    pub exit_code: i32,
    pub residuals: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gauge: Option<GaugeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<TraceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_algebra: Option<AlgebraFile>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl Report {
    fn new(command: &str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.to_string(),
            command: command.to_string(),
            status: String::new(),
            exit_code: 0,
            residuals: BTreeMap::new(),
            seed: None,
            gauge: None,
            trace: None,
            output_algebra: None,
            details: BTreeMap::new(),
            message: None,
        }
    }

    fn finish(mut self, code: ExitCode, status: &str) -> Self {
        self.exit_code = code.code();
        self.status = status.to_string();
        self
    }

    fn error(command: &str, e: &Error) -> Self {
        let mut r = Self::new(command);
        r.message = Some(e.to_string());
        r.finish(ExitCode::for_error(e), "error")
    }

    fn put(&mut self, entries: impl IntoIterator<Item = (impl Into<String>, f64)>) {
        for (k, v) in entries {
            self.residuals.insert(k.into(), v);
        }
    }

    pub fn to_json(&self) -> String {
        to_json_compact(self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn wrap(command: &str, body: impl FnOnce(&mut Report) -> Result<(ExitCode, String)>) -> Report {
    let mut r = Report::new(command);
    match body(&mut r) {
        Ok((code, status)) => r.finish(code, &status),
        Err(e) => Report::error(command, &e),
    }
}

fn require_candidate(file: &AlgebraFile) -> Result<PskCandidate> {
    file.candidate().ok_or_else(|| Error::Parse("file has no candidate block".into()))
}

/// Kähler check, connection, curvature and all intrinsic residuals of the embedded candidate.
pub fn cmd_check(text: &str) -> Report {
    wrap("check", |r| {
        let file = AlgebraFile::parse(text)?;
        let cand = require_candidate(&file)?;
        let alg = file.algebra()?;
        let basis = AdaptedBasis::new(file.n);
        let kr = kahler_check(&alg, &basis)?;
        r.put([("kahler_closedness", kr.closedness), ("kahler_shape", kr.shape_residual)]);
        if !kr.is_kahler() {
            return Err(Error::NotKahler { residual: kr.closedness.max(kr.shape_residual) });
        }
        let conn = levi_civita(&alg, &basis)?;
        alg.solve_primitive(&basis.kahler_form())?;
        let prim = (&alg.ce_differential(&cand.kappa) - &basis.kahler_form()).max_abs();
        r.put([("primitive", prim)]);
        cand.check_primitive(&alg, &basis)?;
        let curv = curvature(&conn, &alg);
        let rep = intrinsic_report(&alg, &basis, &conn, &curv, &cand);
        r.put(rep.named());
        let ok = rep.max_all() < CHECK_TOL;
        Ok(if ok { (ExitCode::Ok, "pass".into()) } else { (ExitCode::ResidualFailure, "fail".into()) })
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub config: SolveConfig,
    /// Fall back to the κ-free equations when the Kähler form is not exact.
    pub kappa_free: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { config: SolveConfig::default(), kappa_free: false }
    }
}

fn geometry(alg: LieAlgebra, kappa_free: bool) -> Result<Geometry> {
    if kappa_free {
        Geometry::with_fallback(alg)
    } else {
        Geometry::new(alg)
    }
}

fn status_exit(s: SolveStatus) -> ExitCode {
    if s == SolveStatus::Solved {
        ExitCode::Ok
    } else {
        ExitCode::ResidualFailure
    }
}

fn record_solve(r: &mut Report, alg: &LieAlgebra, labels: Option<Vec<String>>, res: &SolveResult) {
    r.put([("best", res.best_residual)]);
    r.put(res.breakdown.iter().copied());
    r.gauge = Some(GaugeRecord { angle: res.gauge.angle, anchor: res.gauge.anchor.map(|(i, j, k)| (i + 1, j + 1, k + 1)) });
    r.trace = Some(TraceRecord {
        starts: res.trace.starts,
        best_start: res.trace.best_start,
        solved_starts: res.trace.solved_starts,
        infeasible_starts: res.trace.infeasible_starts,
        total_iterations: res.trace.total_iterations,
    });
    r.output_algebra = Some(AlgebraFile::from_algebra(alg, labels, Some(&res.candidate)));
    let orbits: Vec<CandidateBlock> = res.orbits.iter().map(CandidateBlock::from_candidate).collect();
    r.details.insert("orbits".into(), serde_json::to_value(orbits).expect("plain data"));
    r.details.insert("kappa_free".into(), Value::Bool(res.kappa_free));
}

pub fn cmd_solve(text: &str, opts: &SolveOptions) -> Report {
    let mut rep = wrap("solve", |r| {
        let file = AlgebraFile::parse(text)?;
        let alg = file.algebra()?;
        let geom = geometry(alg.clone(), opts.kappa_free)?;
        let res = solve(&geom, &opts.config)?;
        record_solve(r, &alg, file.labels.clone(), &res);
        Ok((status_exit(res.status), res.status.as_str().into()))
    });
    rep.seed = Some(opts.config.seed);
    rep
}

/// Parses `lo:hi:steps`.
pub fn parse_range(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::Config(format!("malformed range {s:?}, expected lo:hi:steps"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(lo.is_finite() && hi.is_finite()) || hi < lo || steps == 0 {
        return Err(bad());
    }
    Ok((lo, hi, steps))
}

/// Substitutes the parameter into a template; the value is written in
/// shortest round-trip form.
pub fn instantiate(template: &str, c: f64) -> String {
    template.replace(SCAN_PLACEHOLDER, &format!("{c:?}"))
}

/// Plain-text `(parameter, residual)` table.
pub fn scan_table(rep: &ScanReport) -> String {
    let mut out = String::from("# parameter\tbest_residual\tsource\n");
    for (c, r) in &rep.grid {
        out.push_str(&format!("{c:.12}\t{r:.6e}\tgrid\n"));
    }
    for (c, r) in &rep.refined {
        out.push_str(&format!("{c:.12}\t{r:.6e}\tpolish\n"));
    }
    out
}

/// Scan over a template whose `{c}` placeholders take the parameter value.
pub fn cmd_scan(template: &str, range: &str, opts: &SolveOptions, polish: bool) -> (Report, String) {
    let mut table = String::new();
    let mut rep = wrap("scan", |r| {
        let (lo, hi, steps) = parse_range(range)?;
        // Validate the template once so malformed files fail before solving.
        AlgebraFile::parse(&instantiate(template, lo))?;
        let family = |c: f64| {
            let file = AlgebraFile::parse(&instantiate(template, c))?;
            geometry(file.algebra()?, opts.kappa_free)
        };
        let sr = scan_curvature(&family, lo, hi, steps, polish, &opts.config)?;
        table = scan_table(&sr);
        let best = sr.grid.iter().chain(&sr.refined).map(|p| p.1).fold(f64::INFINITY, f64::min);
        r.put([("best", best)]);
        r.details.insert("grid".into(), serde_json::to_value(&sr.grid).expect("plain data"));
        r.details.insert("refined".into(), serde_json::to_value(&sr.refined).expect("plain data"));
        r.details.insert("feasible".into(), serde_json::to_value(&sr.feasible).expect("plain data"));
        Ok((ExitCode::Ok, if sr.feasible.is_empty() { "no feasible parameter" } else { "feasible parameters found" }.into()))
    });
    rep.seed = Some(opts.config.seed);
    (rep, table)
}

/// Cone-level verification of the embedded candidate.
pub fn cmd_cone_verify(text: &str) -> Report {
    wrap("cone-verify", |r| {
        let file = AlgebraFile::parse(text)?;
        let cand = require_candidate(&file)?;
        let alg = file.algebra()?;
        let basis = AdaptedBasis::new(file.n);
        let conn = levi_civita(&alg, &basis)?;
        let (p, q) = build_pq(&cand);
        let v = verify_cone(&alg, &basis, &conn, &p, &q, &cand.kappa)?;
        r.put(v.conditions.named());
        r.put([
            ("d_squared", v.d_squared),
            ("lc_structural", v.lc_structural),
            ("lc_g_skew", v.lc_g_symmetry),
            ("lc_i_commute", v.lc_i_symmetry),
            ("eta_symmetry", v.eta_symmetry),
            ("block_t", v.blocks_max[0]),
            ("block_u", v.blocks_max[1]),
            ("block_v", v.blocks_max[2]),
            ("block_w", v.blocks_max[3]),
            ("block_match", v.block_match),
        ]);
        let ok = v.max() < CONE_TOL;
        Ok(if ok { (ExitCode::Ok, "flat".into()) } else { (ExitCode::ResidualFailure, "not flat".into()) })
    })
}

fn record_qk(r: &mut Report, q: &QkStructure, v: &QkReport) {
    r.put(v.named());
    r.put([("constancy", q.constancy_residual)]);
    r.details.insert("dimension".into(), Value::from(v.dimension));
    r.details.insert("completely_solvable".into(), Value::Bool(v.completely_solvable));
    r.details.insert("derived_dims".into(), serde_json::to_value(&v.derived_dims).expect("plain data"));
    r.details.insert("killing_spectrum".into(), serde_json::to_value(&v.killing_spectrum).expect("plain data"));
    r.details.insert("metric_diagonal".into(), serde_json::to_value(&q.metric).expect("plain data"));
    r.output_algebra = Some(AlgebraFile::from_algebra(&q.algebra, Some(q.labels.clone()), None));
}

/// c-map of the embedded candidate; the output algebra is in `output_algebra`.
pub fn cmd_cmap(text: &str) -> Report {
    wrap("cmap", |r| {
        let file = AlgebraFile::parse(text)?;
        let cand = require_candidate(&file)?;
        let alg = file.algebra()?;
        let q = qk_algebra(&alg, &AdaptedBasis::new(file.n), &cand)?;
        let v = qk_verify(&q);
        record_qk(r, &q, &v);
        Ok(if v.passes() { (ExitCode::Ok, "pass".into()) } else { (ExitCode::ResidualFailure, "fail".into()) })
    })
}
