use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use muckenhoupt::family::random_nonnegative;
use muckenhoupt::space::{doubling_with_masses, BallIndex};
use muckenhoupt::weights::{ap_constant_with, lognormal_weight};
use muckenhoupt::{generate, maximal_with, MeasureSpec, SpaceKind, Strategy};

const SIZES: [usize; 3] = [256, 512, 1024];
const STRATEGIES: [(&str, Strategy); 2] = [("sequential", Strategy::Sequential), ("parallel", Strategy::Parallel)];

fn space(n: usize) -> muckenhoupt::FiniteMetricMeasureSpace {
    let s = generate(SpaceKind::Grid1d { n, a: 0.0, b: 1.0 }, &MeasureSpec::Random { lo: 0.5, hi: 2.0 }, 1).unwrap();
    s.index();
    s
}

fn index_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("ball_index");
    group.sample_size(10);
    for n in SIZES {
        let s = space(n);
        for (name, strategy) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, n), &s, |b, s| b.iter(|| BallIndex::build(s, strategy)));
        }
    }
    group.finish();
}

fn maximal(c: &mut Criterion) {
    let mut group = c.benchmark_group("maximal");
    group.sample_size(10);
    for n in SIZES {
        let s = space(n);
        let f = random_nonnegative(n, 1, 3).remove(0);
        for (name, strategy) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, n), &s, |b, s| {
                b.iter(|| maximal_with(s, black_box(&f), strategy).unwrap())
            });
        }
    }
    group.finish();
}

fn ap_constant(c: &mut Criterion) {
    let mut group = c.benchmark_group("ap_constant");
    group.sample_size(10);
    for n in SIZES {
        let s = space(n);
        let w = lognormal_weight(n, 1.0, 5).unwrap();
        for (name, strategy) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, n), &s, |b, s| {
                b.iter(|| ap_constant_with(s, black_box(&w), 2.0, false, strategy).unwrap())
            });
        }
    }
    group.finish();
}

fn doubling(c: &mut Criterion) {
    let mut group = c.benchmark_group("doubling");
    group.sample_size(10);
    for n in SIZES {
        let s = space(n);
        for (name, strategy) in STRATEGIES {
            group.bench_with_input(BenchmarkId::new(name, n), &s, |b, s| {
                b.iter(|| doubling_with_masses(s, black_box(s.measure()), strategy))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, index_build, maximal, ap_constant, doubling);
criterion_main!(benches);
