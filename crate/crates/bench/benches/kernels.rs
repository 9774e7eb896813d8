use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use fluctus_bench::{coin_series, surrogate_profile};
use fluctus_core::{
    default_scales, detect_crossover, extract_events, fit_scaling, fluctuation_function,
    gen_arfima, periodogram, ArfimaParams, ScaleCap,
};

fn bench_fluctuation(c: &mut Criterion) {
    let mut group = c.benchmark_group("fluctuation_function");
    for order in [1usize, 3] {
        let profile = surrogate_profile(32_400, 0.3, 7);
        let scales = default_scales(profile.len(), order, ScaleCap::Quarter).unwrap();
        group.bench_function(format!("n32400_dfa{order}"), |b| {
            b.iter(|| fluctuation_function(black_box(&profile), order, &scales).unwrap())
        });
    }
    group.finish();
}

fn bench_generation(c: &mut Criterion) {
    let params = ArfimaParams::fractional(0.3).unwrap();
    let white = ArfimaParams::white_noise(1.0).unwrap();
    let mut group = c.benchmark_group("gen_arfima");
    group.bench_function("d0_n32400", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            gen_arfima(black_box(&white), 32_400, seed).unwrap()
        })
    });
    group.bench_function("d03_n32400", |b| {
        let mut seed = 0u64;
        b.iter(|| {
            seed += 1;
            gen_arfima(black_box(&params), 32_400, seed).unwrap()
        })
    });
    group.finish();
}

fn bench_inference(c: &mut Criterion) {
    let profile = surrogate_profile(32_400, 0.3, 11);
    let scales = default_scales(profile.len(), 1, ScaleCap::Quarter).unwrap();
    let curve = fluctuation_function(&profile, 1, &scales).unwrap();
    c.bench_function("fit_scaling", |b| {
        b.iter(|| fit_scaling(black_box(&curve), None).unwrap())
    });
    c.bench_function("detect_crossover", |b| {
        b.iter(|| detect_crossover(black_box(&curve)).unwrap())
    });
}

fn bench_series_ops(c: &mut Criterion) {
    let series = coin_series(86_400, 3);
    c.bench_function("periodogram_n86400", |b| {
        b.iter(|| periodogram(black_box(&series)).unwrap())
    });
    c.bench_function("extract_events_n86400", |b| {
        b.iter_batched(
            || series.clone(),
            |s| extract_events(black_box(&s), 0.6),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(
    benches,
    bench_fluctuation,
    bench_generation,
    bench_inference,
    bench_series_ops
);
criterion_main!(benches);
