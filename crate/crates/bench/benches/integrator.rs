use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use twofold::integrator::{integrate, oracle_return, FieldSpec, IntegratorOptions};
use twofold::{Coefficients, Point3, SigmaPoint};

fn bench_integrator(c: &mut Criterion) {
    let spec: FieldSpec = Coefficients::new(-1.0, 1.0, 2.0, -2.0).unwrap().into();
    let opts = IntegratorOptions::default();

    let mut group = c.benchmark_group("integrator");
    group.sample_size(20);
    group.bench_function("oracle_return", |b| {
        b.iter(|| {
            black_box(oracle_return(
                &spec,
                black_box(SigmaPoint::new(0.5, -0.2)),
                &opts,
            ))
        });
    });
    group.bench_function("integrate_crossing_then_slide", |b| {
        b.iter(|| {
            black_box(integrate(
                &spec,
                black_box(Point3::new(1.0, -5.0, 1e-10)),
                5.0,
                &opts,
            ))
        });
    });
    group.finish();
}

criterion_group!(benches, bench_integrator);
criterion_main!(benches);
