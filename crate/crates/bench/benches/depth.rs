use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use depthguard::experiments::gaussian_sample;
use depthguard::{
    depth_median_probabilities, halfspace_depth, sample_directions, BreakdownCertifier,
    CandidateGrid, DepthKind, DepthSpec, Prior, RandomSource,
};

fn halfspace(c: &mut Criterion) {
    let mut group = c.benchmark_group("halfspace_depth");
    for n in [100, 1000, 10_000] {
        let data = gaussian_sample(n, 2, 1.0, &mut RandomSource::new(1)).unwrap();
        let dirs = sample_directions(500, 2, 2).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| halfspace_depth(black_box(&[0.1, -0.2]), &data, &dirs).unwrap())
        });
    }
    group.finish();
}

fn breakdown(c: &mut Criterion) {
    let data = gaussian_sample(1000, 2, 1.0, &mut RandomSource::new(3)).unwrap();
    let dirs = sample_directions(200, 2, 4).unwrap();
    c.bench_function("breakdown_certifier_build", |b| {
        b.iter(|| BreakdownCertifier::new(black_box(&data), &dirs).unwrap())
    });
    let certifier = BreakdownCertifier::new(&data, &dirs).unwrap();
    c.bench_function("breakdown_holds", |b| {
        b.iter(|| certifier.holds(black_box(&[0.0, 0.0]), 0.1, 12.5).unwrap())
    });
}

fn median_grid(c: &mut Criterion) {
    let data = gaussian_sample(500, 2, 1.0, &mut RandomSource::new(5)).unwrap();
    let dirs = sample_directions(100, 2, 6).unwrap();
    let grid = CandidateGrid::regular(&[-2.0, -2.0], &[2.0, 2.0], 21).unwrap();
    let spec = DepthSpec::new(DepthKind::Halfspace, &dirs);
    c.bench_function("depth_median_probabilities_21x21", |b| {
        b.iter(|| {
            depth_median_probabilities(black_box(&data), spec, &grid, &Prior::Uniform, 1.0).unwrap()
        })
    });
}

criterion_group!(benches, halfspace, breakdown, median_grid);
criterion_main!(benches);
