use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rpsflow_bench::{flagship, short_run};
use rpsflow_core::{
    integrate, recurrence_scan, IntegratorConfig, Method, RecurrenceConfig, SimplexSystem, Space,
    TransformedSystem, VectorField,
};

fn field_eval(c: &mut Criterion) {
    let mut group = c.benchmark_group("field_eval");
    for n in [3, 8, 32] {
        let (state, params) = flagship(n);
        let simplex = SimplexSystem::new(params.clone()).unwrap();
        let transformed = TransformedSystem::new(params).unwrap();
        let u = state.to_concat();
        let v = state.to_transformed().to_concat();
        let mut du = vec![0.0; u.len()];
        let mut dv = vec![0.0; v.len()];
        group.bench_with_input(BenchmarkId::new("simplex", n), &n, |b, _| {
            b.iter(|| simplex.eval(black_box(&u), &mut du))
        });
        group.bench_with_input(BenchmarkId::new("transformed", n), &n, |b, _| {
            b.iter(|| transformed.eval(black_box(&v), &mut dv))
        });
    }
    group.finish();
}

fn integrate_t10(c: &mut Criterion) {
    let (state, params) = flagship(3);
    let mut group = c.benchmark_group("integrate_t10");
    let configs = [
        ("adaptive_transformed", short_run(10.0)),
        (
            "adaptive_simplex",
            IntegratorConfig {
                space: Space::Simplex,
                ..short_run(10.0)
            },
        ),
        (
            "rk4_transformed",
            IntegratorConfig {
                method: Method::FixedRk4,
                ..short_run(10.0)
            },
        ),
    ];
    for (name, cfg) in configs {
        group.bench_function(name, |b| {
            b.iter(|| integrate(black_box(&state), &params, &cfg).unwrap())
        });
    }
    group.finish();
}

fn recurrence(c: &mut Criterion) {
    let (state, params) = flagship(3);
    let traj = integrate(&state, &params, &short_run(1000.0)).unwrap();
    let cfg = RecurrenceConfig::default();
    c.bench_function("recurrence_scan_t1000", |b| {
        b.iter(|| recurrence_scan(black_box(&traj), &cfg).unwrap())
    });
}

criterion_group!(benches, field_eval, integrate_t10, recurrence);
criterion_main!(benches);
