use std::hint::black_box;

use cfslab::probes::{asymptotic_integral_lemma, EpsGrid};
use cfslab::sandbox::{build_basis, local_correlations, sample_ball, smeared_operator, BasisSpec, Regularization, TestFunction};
use cfslab::{Exec, SpacetimePoint};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [Exec; 2] = [Exec::Sequential, Exec::Parallel];

fn smeared(c: &mut Criterion) {
    let basis = build_basis(&BasisSpec::for_modes(1.0, 0.05, 64).unwrap()).unwrap();
    let f = TestFunction::unit_bump(SpacetimePoint::new(1.0, 0.0, 0.0, 1.0), 0.3);
    let mut group = c.benchmark_group("smeared_operator_n64");
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| smeared_operator(&basis, black_box(&f), Regularization::Eps(0.05), exec).unwrap())
        });
    }
    group.finish();
}

fn correlations(c: &mut Criterion) {
    let basis = build_basis(&BasisSpec::for_modes(1.0, 0.05, 64).unwrap()).unwrap();
    let points = sample_ball(SpacetimePoint::ORIGIN, 1.0, 32, 7);
    let mut group = c.benchmark_group("local_correlations_32pts");
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| local_correlations(&basis, 0.05, black_box(&points), exec).unwrap())
        });
    }
    group.finish();
}

fn lemma(c: &mut Criterion) {
    let grid = EpsGrid::geometric(1e-2, 5e-3, 2).unwrap();
    let f = TestFunction::unit_bump(SpacetimePoint::new(1.0, 1.0, 0.0, 0.0), 0.2);
    let mut group = c.benchmark_group("lemma_integral_outer8");
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| asymptotic_integral_lemma(black_box(&f), &grid, 8, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, smeared, correlations, lemma);
criterion_main!(benches);
