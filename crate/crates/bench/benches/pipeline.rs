use criterion::{black_box, criterion_group, criterion_main, Criterion};

use psk_bench::workloads;
use psk_core::cmap::qk_algebra;
use psk_core::cone::verify_cone;
use psk_core::connection::{curvature, levi_civita};
use psk_core::intrinsic::{build_pq, intrinsic_report};
use psk_core::models::ch1;
use psk_core::solver::{solve, Geometry, SolveConfig};
use psk_core::Form;

fn wedge(c: &mut Criterion) {
    let dim = 12;
    let x: Form = (0..dim).map(|i| Form::generator(dim, i).scale(i as f64 + 1.0)).fold(Form::zero(dim), |a, b| &a + &b);
    let x2 = &x ^ &Form::generator(dim, 3);
    c.bench_function("wedge/1x2 dim12", |b| b.iter(|| black_box(&x) ^ black_box(&x2)));
}

fn residuals(c: &mut Criterion) {
    for w in workloads() {
        let conn = levi_civita(&w.algebra, &w.basis).unwrap();
        let curv = curvature(&conn, &w.algebra);
        c.bench_function(&format!("intrinsic/{}", w.name), |b| {
            b.iter(|| intrinsic_report(&w.algebra, &w.basis, &conn, &curv, black_box(&w.candidate)))
        });
        let geom = Geometry::new(w.algebra.clone()).unwrap();
        let model = geom.model();
        let x = geom.pack(&w.candidate);
        c.bench_function(&format!("model_jacobian/{}", w.name), |b| b.iter(|| model.jacobian_at(black_box(&x))));
    }
}

fn cone(c: &mut Criterion) {
    for w in workloads() {
        let conn = levi_civita(&w.algebra, &w.basis).unwrap();
        let (p, q) = build_pq(&w.candidate);
        c.bench_function(&format!("cone_verify/{}", w.name), |b| {
            b.iter(|| verify_cone(&w.algebra, &w.basis, &conn, &p, &q, &w.candidate.kappa).unwrap())
        });
    }
}

fn cmap(c: &mut Criterion) {
    for w in workloads() {
        c.bench_function(&format!("cmap/{}", w.name), |b| b.iter(|| qk_algebra(&w.algebra, &w.basis, &w.candidate).unwrap()));
    }
}

fn solver(c: &mut Criterion) {
    let geom = Geometry::new(ch1(2.0 / 3f64.sqrt())).unwrap();
    let cfg = SolveConfig { starts: 16, ..SolveConfig::default() };
    let mut group = c.benchmark_group("solve");
    group.sample_size(20);
    group.bench_function("ch1_2_over_sqrt3/16 starts", |b| b.iter(|| solve(&geom, &cfg).unwrap()));
    group.finish();
}

criterion_group!(benches, wedge, residuals, cone, cmap, solver);
criterion_main!(benches);
