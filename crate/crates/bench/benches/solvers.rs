use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use vikit_bench::{config, example1, example2};
use vikit_core::matrix::DenseMatrix;
use vikit_core::problems::{example1_matrix, InitKind};
use vikit_core::{solve, FeasibleSet, Scheme, Space, SpaceElement};

fn solvers(c: &mut Criterion) {
    let problem = example1(100);
    let mut group = c.benchmark_group("ex1_n100_400_iterations");
    group.sample_size(10);
    for scheme in Scheme::ALL {
        let cfg = config(&problem, scheme, InitKind::RandomUniform(1), 400);
        group.bench_with_input(BenchmarkId::from_parameter(scheme), &cfg, |b, cfg| {
            b.iter(|| solve(&problem, cfg).expect("solve"))
        });
    }
    group.finish();

    let problem = example2();
    let mut group = c.benchmark_group("ex2_grid101_50_iterations");
    for scheme in Scheme::PROPOSED {
        let cfg = config(&problem, scheme, InitKind::TSquared, 50);
        group.bench_with_input(BenchmarkId::from_parameter(scheme), &cfg, |b, cfg| {
            b.iter(|| solve(&problem, cfg).expect("solve"))
        });
    }
    group.finish();
}

fn projections(c: &mut Criterion) {
    let n = 100;
    let space = Space::Euclidean(n);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = SpaceElement::random_uniform(space, -10.0, 10.0, &mut rng);
    let sets = [
        ("box", FeasibleSet::uniform_box(n, -2.0, 5.0).unwrap()),
        ("ball", FeasibleSet::unit_ball(space)),
        (
            "halfspace",
            FeasibleSet::halfspace(
                SpaceElement::random_uniform(space, -1.0, 1.0, &mut rng),
                SpaceElement::zeros(space),
            )
            .unwrap(),
        ),
    ];
    let mut group = c.benchmark_group("project_n100");
    for (name, set) in &sets {
        group.bench_function(*name, |b| b.iter(|| set.project(black_box(&x)).unwrap()));
    }
    group.finish();
}

fn power_iteration(c: &mut Criterion) {
    let mut group = c.benchmark_group("spectral_norm");
    group.sample_size(10);
    for n in [100, 200] {
        let g: DenseMatrix = example1_matrix(n, 7);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| g.spectral_norm(1e-10, 10_000).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, solvers, projections, power_iteration);
criterion_main!(benches);
