//! Distribution-comparison throughput on ensemble sizes the experiments use.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use levylab_core::{ks_distance, ks_distance_to_cdf, substream, wasserstein1, EmpiricalDistribution};
use rand::Rng;
use rand_distr::Exp;

fn exp_sample(n: usize, rate: f64, stream: u64) -> Vec<f64> {
    let mut rng = substream(3, stream);
    let d = Exp::new(rate).unwrap();
    (0..n).map(|_| rng.sample(d)).collect()
}

fn bench_distances(c: &mut Criterion) {
    let mut group = c.benchmark_group("distances");
    for &n in &[1_000usize, 10_000, 100_000] {
        let a = EmpiricalDistribution::new(exp_sample(n, 2.0, 0)).unwrap();
        let b = EmpiricalDistribution::new(exp_sample(n, 2.0, 1)).unwrap();
        group.bench_with_input(BenchmarkId::new("ks_two_sample", n), &n, |bench, _| {
            bench.iter(|| ks_distance(&a, &b))
        });
        group.bench_with_input(BenchmarkId::new("ks_to_cdf", n), &n, |bench, _| {
            bench.iter(|| ks_distance_to_cdf(&a, |z| 1.0 - (-2.0 * z).exp()))
        });
        group.bench_with_input(BenchmarkId::new("wasserstein1", n), &n, |bench, _| {
            bench.iter(|| wasserstein1(&a, &b))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_distances);
criterion_main!(benches);
