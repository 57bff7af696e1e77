use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use funcavg_bench::{continuous, discrete};
use funcavg_core::bootstrap::{hoeffding_ci, hoeffding_u_ci, resample};
use funcavg_core::{BootstrapConfig, EstimatorKind, ResampleSize, RngStream, UFactor};

fn hoeffding(c: &mut Criterion) {
    let mut group = c.benchmark_group("hoeffding");
    group.sample_size(10);
    for n in [500, 2_500] {
        let y = continuous(n, 1);
        let cfg = BootstrapConfig::new(500, RngStream::new(1, 0));
        group.bench_with_input(BenchmarkId::new("midrange-B500", n), &y, |b, y| {
            b.iter(|| hoeffding_ci(&resample(black_box(y), &cfg, |v| EstimatorKind::Midrange.apply(v)).unwrap(), 0.05))
        });
        let sqrt = cfg.with_size(ResampleSize::Sqrt);
        group.bench_with_input(BenchmarkId::new("midrange-m-out-of-n-B500", n), &y, |b, y| {
            b.iter(|| hoeffding_ci(&resample(black_box(y), &sqrt, |v| EstimatorKind::Midrange.apply(v)).unwrap(), 0.05))
        });
        let r = discrete(n, 1);
        group.bench_with_input(BenchmarkId::new("plugin-u-B500", n), &r, |b, r| {
            b.iter(|| {
                let d = resample(black_box(r), &cfg, |v| EstimatorKind::Plugin.apply(v)).unwrap();
                hoeffding_u_ci(&d, 0.05, UFactor::Improved)
            })
        });
    }
    group.finish();
}

criterion_group!(benches, hoeffding);
criterion_main!(benches);
