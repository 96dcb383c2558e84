use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use quaketail::evt::rank_with_random_ties;
use quaketail::sim::{simulate_batch, synthetic_catalog};
use quaketail::{decluster, fit_censored_gompertz, RngStream, WindowTable};
use quaketail_bench::{law, model, pairs};

fn joint_tail(c: &mut Criterion) {
    let m = model();
    c.bench_function("parametric joint tail (7.6, 5.8)", |b| {
        b.iter(|| m.joint_tail(black_box(7.6), black_box(5.8)).unwrap())
    });
    let xs: Vec<f64> = (0..=80).map(|i| 5.0 + 0.05 * i as f64).collect();
    c.bench_function("parametric level curve, 81 points", |b| {
        b.iter(|| m.level_curve(black_box(1e-3), &xs).unwrap())
    });
}

fn gompertz_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("censored gompertz fit");
    for n in [200, 2000] {
        let p = pairs(n, 1);
        group.bench_with_input(BenchmarkId::from_parameter(n), &p, |b, p| {
            b.iter(|| fit_censored_gompertz(p).unwrap())
        });
    }
    group.finish();
}

fn rank_estimators(c: &mut Criterion) {
    let p = pairs(2000, 2);
    let ranked = rank_with_random_ties(&p, &mut RngStream::new(2, 1));
    c.bench_function("rank with random ties, n=2000", |b| {
        b.iter(|| rank_with_random_ties(&p, &mut RngStream::new(2, 1)))
    });
    c.bench_function("r_hat, n=2000 k=40", |b| b.iter(|| ranked.r_hat(black_box(0.7), 40).unwrap()));
    c.bench_function("r_hat smoothed, n=2000 k=40", |b| {
        b.iter(|| ranked.r_hat_smoothed(black_box(0.7), 40).unwrap())
    });
}

fn declustering(c: &mut Criterion) {
    let catalog = synthetic_catalog(&pairs(2000, 3));
    let table = WindowTable::default();
    c.bench_function("decluster synthetic catalog, 2000 events", |b| {
        b.iter(|| decluster(&catalog, &table, 5.0).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let l = law();
    let mut group = c.benchmark_group("simulate batch");
    group.sample_size(10);
    group.bench_function("1000 events at m0=6", |b| b.iter(|| simulate_batch(&l, 6.0, 1000, 4, 0, 100)));
    group.finish();
}

criterion_group!(benches, joint_tail, gompertz_fit, rank_estimators, declustering, simulation);
criterion_main!(benches);
