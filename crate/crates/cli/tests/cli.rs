use std::path::PathBuf;
use std::process::{Command, Output};

use psk_core::interface::{AlgebraFile, Report};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn psk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psk")).args(args).env_remove("PSK_SEED").output().unwrap()
}

fn report(out: &Output) -> Report {
    Report::from_json(&String::from_utf8_lossy(&out.stdout)).unwrap()
}

fn path(name: &str) -> String {
    fixture(name).to_string_lossy().into_owned()
}

#[test]
fn check_worked_example() {
    let out = psk(&["check", &path("ch1_pair.json")]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.status, "pass");
    assert!(r.residuals.values().all(|v| *v < 1e-9));
}

#[test]
fn check_residual_failure() {
    let out = psk(&["check", &path("ch1_c1.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!((report(&out).residuals["w_pq"] - 3.0).abs() < 1e-12);
}

#[test]
fn check_not_exact() {
    let out = psk(&["check", &path("abelian_r2.json")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(report(&out).message.unwrap().contains("not exact"));
}

#[test]
fn parse_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 1, \"brackets\": [[2, 1, 1, 1.0]]}").unwrap();
    assert_eq!(psk(&["check", bad.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(psk(&["check", "/nonexistent/file.json"]).status.code(), Some(2));
}

#[test]
fn solve_statuses() {
    let out = psk(&["solve", &path("ch1_c2.json"), "--seed", "1", "--starts", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r.status, "Solved");
    assert_eq!(r.seed, Some(1));
    assert!(r.residuals["best"] < 1e-10);
    let out = psk(&["solve", &path("ch1_c1.json"), "--starts", "16"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out).status, "LikelyInfeasible");
}

#[test]
fn solve_triple_product() {
    let out = psk(&["solve", &path("ch1_cubed_c2.json"), "--starts", "16"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    let cand = r.output_algebra.unwrap().candidate().unwrap();
    let target = AlgebraFile::parse(&std::fs::read_to_string(fixture("ch1_cubed_c2.json")).unwrap()).unwrap().candidate().unwrap();
    assert!(psk_core::solver::certify_gauge_orbit(&cand, &target) < 1e-7);
}

#[test]
fn seed_from_environment_is_deterministic() {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_psk"))
            .args(["solve", &path("ch1_c1.json"), "--starts", "8"])
            .env("PSK_SEED", "42")
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(report(&a).seed, Some(42));
}

#[test]
fn scan_table_and_range_errors() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("scan.json");
    let out = psk(&[
        "scan",
        &path("ch1_template.json"),
        "--param-range",
        "1:3:11",
        "--starts",
        "8",
        "--no-polish",
        "--report",
        rep.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = String::from_utf8_lossy(&out.stdout);
    assert_eq!(table.lines().filter(|l| l.ends_with("grid")).count(), 11);
    let r = Report::from_json(&std::fs::read_to_string(rep).unwrap()).unwrap();
    assert_eq!(r.details["feasible"], json_list(&[2.0]));
    let out = psk(&["scan", &path("ch1_template.json"), "--param-range", "1:3"]);
    assert_eq!(out.status.code(), Some(2));
}

fn json_list(v: &[f64]) -> psk_core::interface::JsonValue {
    v.iter().map(|x| psk_core::interface::JsonValue::from(*x)).collect()
}

#[test]
fn cone_verify_fixtures() {
    for name in ["ch1_pair.json", "ch_flat_2.json", "ch1_c2.json", "ch1_c2_over_sqrt3.json"] {
        let out = psk(&["cone-verify", &path(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        let r = report(&out);
        for key in ["flatness", "torsion", "i_symmetry", "g_symmetry", "conic_x", "conic_jx"] {
            assert!(r.residuals[key] < 1e-9, "{name} {key}");
        }
    }
    let out = psk(&["cone-verify", &path("ch1_pair_perturbed_kappa.json")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(report(&out).residuals["flatness"] > 1e-3);
}

#[test]
fn cmap_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for (name, dim) in [("ch1_pair.json", 12), ("ch1_c2.json", 8)] {
        let out_path = dir.path().join(format!("out_{name}"));
        let out = psk(&["cmap", &path(name), "-o", out_path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let alg = AlgebraFile::parse(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
        assert_eq!(2 * alg.n, dim);
        assert!(alg.algebra().is_ok());
        assert_eq!(report(&out).details["dimension"], dim);
    }
    assert_eq!(psk(&["cmap", &path("bad_candidate.json")]).status.code(), Some(4));
}
