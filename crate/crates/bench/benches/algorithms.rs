use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use depeg_core::code::peel_erasures;
use depeg_core::dispersal::k_star;
use depeg_core::stopping::EnumerateOptions;
use depeg_core::{build_de_peg, build_peg, enumerate_stopping_sets, PegParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(m: usize, seed: u64) -> PegParams {
    PegParams::for_layer(3, m, 1, 2, seed)
}

fn construction(c: &mut Criterion) {
    let mut group = c.benchmark_group("construct");
    group.sample_size(10);
    for m in [64, 128, 256] {
        let p = params(m, 0);
        group.bench_with_input(BenchmarkId::new("peg", m), &p, |b, p| b.iter(|| build_peg(p).unwrap()));
        group.bench_with_input(BenchmarkId::new("de_peg", m), &p, |b, p| b.iter(|| build_de_peg(p).unwrap()));
    }
    group.finish();
}

fn peeling(c: &mut Criterion) {
    let mut group = c.benchmark_group("peel");
    for m in [256, 1024] {
        let g = build_peg(&params(m, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let erased: Vec<bool> = (0..m).map(|_| rng.random_bool(0.3)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(m), &erased, |b, e| b.iter(|| peel_erasures(&g, black_box(e))));
    }
    group.finish();
}

fn stopping_sets(c: &mut Criterion) {
    let mut group = c.benchmark_group("stopping_sets");
    group.sample_size(10);
    let g = build_peg(&params(64, 2)).unwrap();
    let opts = EnumerateOptions { budget: 1_000_000, minimal_only: false };
    for bound in [8, 10] {
        group.bench_with_input(BenchmarkId::new("m64", bound), &bound, |b, &bound| {
            b.iter(|| enumerate_stopping_sets(&g, bound, &opts, &mut ChaCha8Rng::seed_from_u64(0)).unwrap())
        });
    }
    group.finish();
}

fn k_star_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("k_star");
    group.sample_size(10);
    for mu in [10, 30] {
        group.bench_with_input(BenchmarkId::new("n9000_m256", mu), &mu, |b, &mu| {
            b.iter(|| k_star(mu, 9000, 256, 0.49, 180, 1e-8).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, construction, peeling, stopping_sets, k_star_search);
criterion_main!(benches);
