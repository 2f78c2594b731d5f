use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use hellinger_core::synth::random_distribution;
use hellinger_core::{hellinger_midpoint, DivergenceReport};

fn divergences(c: &mut Criterion) {
    let mut group = c.benchmark_group("divergence_report");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in [16usize, 1024, 65_536] {
        let a = random_distribution(&mut rng, k, 1.0);
        let b = random_distribution(&mut rng, k, 1.0);
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |bench, _| {
            bench.iter(|| DivergenceReport::compute(black_box(&a), black_box(&b)).unwrap())
        });
    }
    group.finish();

    let a = random_distribution(&mut rng, 4096, 1.0);
    let b = random_distribution(&mut rng, 4096, 1.0);
    c.bench_function("midpoint_4096", |bench| {
        bench.iter(|| hellinger_midpoint(black_box(&a), black_box(&b)).unwrap())
    });
}

criterion_group!(benches, divergences);
criterion_main!(benches);
