use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use poisson_polymer::analytics::bessel_gamma;
use poisson_polymer::polymer::{build_ensemble, occupancy_field, replica_overlap, replica_overlap_pairwise, sample_paths};
use poisson_polymer::rng::{stream, StreamTag};
use poisson_polymer::TimeGrid;
use polymer_bench::fixture;

fn paths(c: &mut Criterion) {
    let grid = TimeGrid::new(2.0, 128).unwrap();
    c.bench_function("sample_paths/M=2000,n=128", |b| {
        b.iter(|| sample_paths(&grid, 1, 2000, &mut stream(1, StreamTag::Paths, 0)).unwrap())
    });
}

fn ensemble(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_ensemble");
    for nu in [1.0, 10.0, 100.0] {
        let f = fixture(2000, 2.0, nu);
        g.bench_with_input(BenchmarkId::from_parameter(nu), &f, |b, f| {
            b.iter(|| build_ensemble(f.paths.clone(), &f.cloud, 0.5, &f.geom).unwrap())
        });
    }
    g.finish();
}

fn field(c: &mut Criterion) {
    let f = fixture(2000, 2.0, 1.0);
    let e = build_ensemble(f.paths.clone(), &f.cloud, 0.5, &f.geom).unwrap();
    let h = f.geom.radius() / 4.0;
    c.bench_function("occupancy_field/M=2000,h=r/4", |b| b.iter(|| occupancy_field(&e, &f.bbox, h).unwrap()));
    let field = occupancy_field(&e, &f.bbox, h).unwrap();
    c.bench_function("replica_overlap/grid", |b| b.iter(|| replica_overlap(black_box(&field))));
    let small = fixture(200, 2.0, 1.0);
    let es = build_ensemble(small.paths.clone(), &small.cloud, 0.5, &small.geom).unwrap();
    c.bench_function("replica_overlap/pairwise,M=200", |b| b.iter(|| replica_overlap_pairwise(black_box(&es))));
}

fn bessel(c: &mut Criterion) {
    c.bench_function("bessel_gamma/d=200", |b| b.iter(|| bessel_gamma(black_box(200)).unwrap()));
}

criterion_group!(benches, paths, ensemble, field, bessel);
criterion_main!(benches);
