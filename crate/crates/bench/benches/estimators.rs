use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use funcavg_bench::{continuous, discrete};
use funcavg_core::estimators::{discrete_plugin_av, midrange};
use funcavg_core::regression::ols_fit;
use funcavg_core::DesignMatrix;

fn point_estimators(c: &mut Criterion) {
    let mut group = c.benchmark_group("point");
    for n in [500, 10_000] {
        let y = continuous(n, 1);
        let r = discrete(n, 1);
        group.bench_with_input(BenchmarkId::new("midrange", n), &y, |b, y| b.iter(|| midrange(black_box(y))));
        group.bench_with_input(BenchmarkId::new("plugin-integer", n), &r, |b, r| {
            b.iter(|| discrete_plugin_av(black_box(r), 0.0))
        });
        group.bench_with_input(BenchmarkId::new("plugin-tolerance", n), &y, |b, y| {
            b.iter(|| discrete_plugin_av(black_box(y), 1e-6))
        });
    }
    group.finish();
}

fn least_squares(c: &mut Criterion) {
    let n = 2_500;
    let y = continuous(n, 2);
    let cols = vec![vec![1.0; n], (0..n).map(|i| (i % 2) as f64).collect(), continuous(n, 3).into_inner()];
    let x = DesignMatrix::from_columns(vec!["(Intercept)".into(), "t".into(), "l".into()], cols).unwrap();
    c.bench_function("ols n=2500 p=3", |b| b.iter(|| ols_fit(black_box(&x), black_box(y.values()))));
}

criterion_group!(benches, point_estimators, least_squares);
criterion_main!(benches);
