use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ncprob::harness::instance::{random_hermitian, random_projection, rng_from_seed};
use ncprob::harness::{classical_oracle, run_property, OracleQuery, DEFAULT_ENUMERATION_CAP};
use ncprob::{etemadi, hajek_renyi, join, kolmogorov_type, spectral_decompose, ClassicalTable, Tolerances};
use ncprob_bench::{commuting_instance, tensor_instance};

const SHAPES: [&[usize]; 3] = [&[2, 2, 2, 2], &[3, 3, 3], &[3, 3, 3, 3, 3]];

fn label(dims: &[usize]) -> String {
    dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

fn kernels(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut g = c.benchmark_group("kernels");
    for dim in [16, 81, 243] {
        let x = random_hermitian(&mut rng_from_seed(1), dim);
        g.bench_with_input(BenchmarkId::new("spectral_decompose", dim), &x, |b, x| {
            b.iter(|| spectral_decompose(x, &tol).unwrap())
        });
        let mut rng = rng_from_seed(2);
        let ps: Vec<_> = (0..3).map(|_| random_projection(&mut rng, dim, dim / 4)).collect();
        g.bench_with_input(BenchmarkId::new("join3", dim), &ps, |b, ps| b.iter(|| join(ps, &tol).unwrap()));
    }
    g.finish();
}

fn chains(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut g = c.benchmark_group("chains");
    for dims in SHAPES {
        let seq = tensor_instance(dims, 3);
        let alphas = vec![1.0; dims.len()];
        g.bench_function(BenchmarkId::new("hajek_renyi", label(dims)), |b| {
            b.iter(|| hajek_renyi(&seq, &alphas, 1.0, &tol).unwrap())
        });
        g.bench_function(BenchmarkId::new("kolmogorov_type", label(dims)), |b| {
            b.iter(|| kolmogorov_type(&seq, 1.0, &tol).unwrap())
        });
        let commuting = commuting_instance(dims, 3);
        g.bench_function(BenchmarkId::new("etemadi", label(dims)), |b| {
            b.iter(|| etemadi(&commuting, 0.5, &tol).unwrap())
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    for n in [10, 16] {
        let table = ClassicalTable::fair_coins(n);
        let q = OracleQuery::MaxAbsPartialSum { t: 3.0 };
        g.bench_with_input(BenchmarkId::new("max_abs_partial_sum", n), &table, |b, t| {
            b.iter(|| classical_oracle(t, &q, DEFAULT_ENUMERATION_CAP).unwrap())
        });
    }
    g.finish();
}

fn suites(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut g = c.benchmark_group("suites");
    g.sample_size(10);
    for name in ["hajek-renyi", "kolmogorov-type", "etemadi"] {
        g.bench_function(BenchmarkId::new(name, 20), |b| b.iter(|| run_property(name, 20, 7, &tol).unwrap()));
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().warm_up_time(Duration::from_millis(500)).measurement_time(Duration::from_secs(3));
    targets = kernels, chains, oracle, suites
}
criterion_main!(benches);
