use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;
use qp_bench::{golden, interval_op, square_op};
use qp_core::green::{invert, schur_complement};
use qp_core::ids::count_leq;
use qp_core::lattice::{HalfLatticePoint, Region};
use qp_core::linalg::log_det;
use qp_core::operator::{complexified, OperatorParams};
use qp_core::torus::torus_norm;

fn bench_assemble(c: &mut Criterion) {
    let mut group = c.benchmark_group("assemble");
    for n in [100u64, 1000] {
        group.bench_with_input(BenchmarkId::new("interval", n), &n, |b, &n| {
            b.iter(|| black_box(interval_op(n, 1e-3)));
        });
    }
    group.bench_function("square_20", |b| {
        b.iter(|| black_box(square_op(20, 1e-3)));
    });
    group.finish();
}

fn bench_inertia(c: &mut Criterion) {
    let mut group = c.benchmark_group("inertia_count");
    for n in [500u64, 2000] {
        let op = interval_op(n, 1e-3);
        group.bench_with_input(BenchmarkId::new("banded", n), &op, |b, op| {
            b.iter(|| black_box(count_leq(op, 0.3)));
        });
    }
    group.finish();
}

fn bench_invert(c: &mut Criterion) {
    let op = interval_op(100, 1e-3);
    c.bench_function("invert_201", |b| {
        b.iter(|| black_box(invert(&op, None).unwrap()));
    });
}

fn bench_complex_det(c: &mut Criterion) {
    let region = Region::integer_cube(40.0, &HalfLatticePoint::zero(1));
    let params = OperatorParams::new(1e-4, vec![golden()], 0.21, 0.3);
    let z = Complex64::new(0.17, 0.02);
    c.bench_function("log_det_complex_81", |b| {
        b.iter(|| black_box(log_det(&complexified(&region, &params, z))));
    });
}

fn bench_schur(c: &mut Criterion) {
    let op = square_op(4, 0.2);
    let m = op.dense();
    c.bench_function("schur_81_core2", |b| {
        b.iter(|| black_box(schur_complement(&m, &[30, 50]).unwrap()));
    });
}

fn bench_torus(c: &mut Criterion) {
    c.bench_function("torus_norm", |b| {
        b.iter(|| black_box(torus_norm(black_box(1234.56789))));
    });
}

criterion_group!(
    benches,
    bench_assemble,
    bench_inertia,
    bench_invert,
    bench_complex_det,
    bench_schur,
    bench_torus
);
criterion_main!(benches);
