use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gfp_core::gfp;
use gfp_core::markov::walk_from_lucas;
use gfp_core::ortho::{build_weight, gram_with};
use gfp_core::par::Execution;
use gfp_core::rational::int;
use gfp_core::spectral::{mc_simulate_with, spectral_measure};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn monte_carlo(c: &mut Criterion) {
    let chain = walk_from_lucas(&int(16), &int(-14)).unwrap();
    let mut group = c.benchmark_group("mc_simulate");
    group.sample_size(10);
    for (label, exec) in MODES {
        group.bench_function(BenchmarkId::new(label, 200_000), |b| {
            b.iter(|| mc_simulate_with(&chain, 0, 10, black_box(200_000), 42, exec).unwrap())
        });
    }
    group.finish();
}

fn gram(c: &mut Criterion) {
    let f = gfp::lookup("Morgan-Voyce B").unwrap();
    let w = build_weight(&f).unwrap();
    let mut group = c.benchmark_group("gram");
    for (label, exec) in MODES {
        group.bench_function(BenchmarkId::new(label, 40), |b| {
            b.iter(|| gram_with(&f, &w, black_box(40), exec).unwrap())
        });
    }
    group.finish();
}

fn km_table(c: &mut Criterion) {
    let chain = walk_from_lucas(&int(8), &int(-3)).unwrap();
    let measure = spectral_measure(&chain).unwrap();
    let mut group = c.benchmark_group("km_table");
    for (label, exec) in MODES {
        group.bench_function(BenchmarkId::new(label, 30), |b| {
            b.iter(|| measure.km_table(black_box(30), 40, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, monte_carlo, gram, km_table);
criterion_main!(benches);
