use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lplab_core::group::{check_cocycle, coboundary, CoefficientGroup, FiniteGroup, NonsingularAction};
use lplab_core::lp::AffineAction;
use lplab_core::mazur::mean_zero_lower_bound;
use lplab_core::random::{random_action_exact, random_complex, random_weights};
use lplab_core::rng::seeded_rng;
use lplab_core::transfer::{profile_integral, transfer_action, RadialProfile, TransferOptions};
use lplab_core::{Complex64, FiniteMeasureSpace};

fn s3_action(atoms: usize, seed: u64) -> (NonsingularAction, Vec<Complex64>) {
    let mut rng = seeded_rng(seed);
    let group = FiniteGroup::symmetric(3).unwrap();
    let perms = random_action_exact(&group, atoms, &mut rng).unwrap();
    let space = FiniteMeasureSpace::from_weights(random_weights(atoms, 0.2, 5.0, &mut rng)).unwrap();
    let v = random_complex(atoms, &mut rng);
    (NonsingularAction::new(group, space, perms).unwrap(), v)
}

fn integral(c: &mut Criterion) {
    let tent = RadialProfile::tent();
    let mut g = c.benchmark_group("profile_integral");
    g.sample_size(10);
    for tol in [1e-4, 1e-6, 1e-8] {
        g.bench_with_input(BenchmarkId::from_parameter(tol), &tol, |b, &tol| {
            b.iter(|| profile_integral(&tent, 1.0, 2.0, black_box(Complex64::new(0.7, -0.4)), tol).unwrap())
        });
    }
    g.finish();
}

fn certificate(c: &mut Criterion) {
    let (action, v) = s3_action(6, 3);
    let alpha = AffineAction::from_coboundary(action, &v, 1.0).unwrap();
    let tent = RadialProfile::tent();
    let mut g = c.benchmark_group("transfer_action");
    g.sample_size(10);
    g.bench_function("S3 x 6 atoms", |b| {
        b.iter(|| transfer_action(&alpha, 2.0, &tent, &TransferOptions::default()).unwrap())
    });
    g.finish();
}

fn cocycle(c: &mut Criterion) {
    let mut g = c.benchmark_group("check_cocycle");
    for atoms in [6, 24, 96] {
        let (action, v) = s3_action(atoms, 5);
        let coc = coboundary(CoefficientGroup::Complex, &v, &action).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(atoms), &atoms, |b, _| {
            b.iter(|| check_cocycle(black_box(&coc), &action, 1e-10).unwrap())
        });
    }
    g.finish();
}

fn mazur(c: &mut Criterion) {
    let mut g = c.benchmark_group("mean_zero_lower_bound");
    g.sample_size(10);
    g.bench_function("(1,2) 200 trials", |b| b.iter(|| mean_zero_lower_bound(1.0, 2.0, 8, 200, 7).unwrap()));
    g.finish();
}

criterion_group!(benches, integral, certificate, cocycle, mazur);
criterion_main!(benches);
