use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use hedgeplay::analysis::{run_suite, sample_specs, Depth};
use hedgeplay::sttg::{solve_dp, DEFAULT_DP_CAP};
use hedgeplay::{brute_force, build_periodic_plan, compute_landmarks, myopic_path, Regime};
use hedgeplay_bench::{game, EXAMPLE_1, EXAMPLE_3};

fn dp(c: &mut Criterion) {
    let mut group = c.benchmark_group("dp");
    group.sample_size(10);
    for horizon in [700, 2000, 5000] {
        let g = game(EXAMPLE_3, horizon);
        group.bench_with_input(BenchmarkId::from_parameter(horizon), &g, |b, g| {
            b.iter(|| solve_dp(black_box(g), DEFAULT_DP_CAP).unwrap())
        });
    }
    group.finish();
}

fn planner(c: &mut Criterion) {
    let g = game(EXAMPLE_1, 10_000);
    c.bench_function("landmarks T=10000", |b| b.iter(|| compute_landmarks(black_box(&g)).unwrap()));
    c.bench_function("periodic plan T=10000", |b| {
        b.iter(|| build_periodic_plan(black_box(&g)).unwrap().expand())
    });
}

fn myopic(c: &mut Criterion) {
    let g = game(EXAMPLE_1, 10_000);
    c.bench_function("myopic path T=10000", |b| b.iter(|| myopic_path(black_box(&g)).unwrap()));
}

fn brute(c: &mut Criterion) {
    let g = game(EXAMPLE_1, 16);
    c.bench_function("brute force T=16", |b| b.iter(|| brute_force(black_box(&g)).unwrap()));
}

fn suite(c: &mut Criterion) {
    let specs = sample_specs(0, 20, Regime::NoDominant, 100);
    let mut group = c.benchmark_group("check suite");
    group.sample_size(10);
    group.bench_function("20 games fast", |b| b.iter(|| run_suite(black_box(&specs), Depth::Fast, None)));
    group.finish();
}

criterion_group!(benches, dp, planner, myopic, brute, suite);
criterion_main!(benches);
