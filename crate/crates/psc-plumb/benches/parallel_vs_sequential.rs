use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use psc_plumb::mean_curvature::{bulk_check, z3_mean_curvature};
use psc_plumb::par::Exec;
use psc_plumb::profile::{default_ladder, profile_margins, search_parameters, ProfileConfig, SearchBudget};

fn modes() -> [(&'static str, Exec); 2] {
    [("parallel", Exec::Parallel), ("sequential", Exec::Sequential)]
}

fn bench(c: &mut Criterion) {
    let cfg = ProfileConfig { p: 4, q: 4, ..Default::default() };
    let pair = search_parameters(&cfg, &default_ladder()[..1], &SearchBudget::default(), 1e-8, Exec::Parallel)
        .unwrap()
        .construction
        .pair;

    let mut g = c.benchmark_group("grid_checks");
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new("margins_and_mean_curvature", name), &exec, |b, &e| {
            b.iter(|| {
                black_box(profile_margins(&pair, e).unwrap());
                black_box(z3_mean_curvature(&pair, e).unwrap());
            })
        });
        g.bench_with_input(BenchmarkId::new("bulk_oracle_32", name), &exec, |b, &e| {
            b.iter(|| black_box(bulk_check(&pair, 32, e).unwrap()))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("parameter_search");
    g.sample_size(10);
    let ladder = default_ladder();
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::new("ladder_4x4_grid512", name), &exec, |b, &e| {
            let small = ProfileConfig { grid: 512, ..cfg.clone() };
            b.iter(|| black_box(search_parameters(&small, &ladder, &SearchBudget::default(), 1e-8, e).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, bench);
criterion_main!(benches);
