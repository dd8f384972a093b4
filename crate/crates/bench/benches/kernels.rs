use std::f64::consts::TAU;

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use phi_inclusion::clarke::{SmoothFn, Spatial, Term};
use phi_inclusion::{
    action, el_residual, make_family, minimize, DiscreteProblem, FamilySpec, GFunction, Init, Potential, SolverOptions,
    TimeExpr, Trajectory,
};

fn power(p: f64, dim: usize) -> GFunction {
    make_family(&FamilySpec::Power { p, dim }).unwrap()
}

fn benchmark_problem(nodes: usize) -> DiscreteProblem {
    let f = Potential::new(
        1,
        vec![
            Term::new(TimeExpr::constant(1.0), Spatial::Smooth(SmoothFn::Phi { phi: power(2.0, 1), start: 0 })),
            Term::new(
                TimeExpr::parse("cos(t)").unwrap(),
                Spatial::Smooth(SmoothFn::Affine { weights: vec![1.0], offset: 0.0 }),
            ),
        ],
        TAU,
    )
    .unwrap();
    DiscreteProblem::new(power(2.0, 1), f, nodes, SolverOptions::default()).unwrap()
}

fn nonsmooth_problem(nodes: usize) -> DiscreteProblem {
    let f = Potential::new(
        2,
        vec![
            Term::new(TimeExpr::parse("2 + sin(t)").unwrap(), Spatial::Smooth(SmoothFn::Phi { phi: power(3.0, 2), start: 0 })),
            Term::new(TimeExpr::constant(0.5), Spatial::AbsNorm(0..2)),
            Term::new(
                TimeExpr::parse("cos(t)").unwrap(),
                Spatial::Smooth(SmoothFn::Affine { weights: vec![1.0, -1.0], offset: 0.0 }),
            ),
        ],
        TAU,
    )
    .unwrap();
    DiscreteProblem::new(power(3.0, 2), f, nodes, SolverOptions::default()).unwrap()
}

fn wave(nodes: usize, dim: usize) -> Trajectory {
    Trajectory::from_fn(TAU, nodes, dim, |t| (0..dim).map(|k| (t + k as f64).sin()).collect()).unwrap()
}

fn action_and_residual(c: &mut Criterion) {
    let mut g = c.benchmark_group("action");
    for nodes in [256, 1024, 4096] {
        let p = nonsmooth_problem(nodes);
        let u = wave(nodes, 2);
        g.bench_with_input(BenchmarkId::new("value", nodes), &u, |b, u| b.iter(|| action(&p, black_box(u)).unwrap()));
        g.bench_with_input(BenchmarkId::new("el_residual", nodes), &u, |b, u| {
            b.iter(|| el_residual(&p, black_box(u)).unwrap())
        });
    }
    g.finish();
}

fn conjugates(c: &mut Criterion) {
    let mut g = c.benchmark_group("conjugate");
    let families = [
        ("power", FamilySpec::Power { p: 3.0, dim: 2 }),
        ("log_tempered", FamilySpec::LogTempered { p: 3.0, dim: 2 }),
        ("companion", FamilySpec::LogDampedCompanion { p: 3.0, dim: 2 }),
    ];
    for (name, spec) in families {
        let phi = make_family(&spec).unwrap();
        g.bench_function(name, |b| b.iter(|| phi.conjugate_numeric(black_box(&[1.7, -0.4]))));
    }
    g.finish();
}

fn projection(c: &mut Criterion) {
    let p = nonsmooth_problem(16);
    let set = p.potential.subdiff(0.3, &[0.0, 0.0]);
    c.bench_function("subdiff_distance", |b| b.iter(|| set.distance(black_box(&[0.8, -2.5])).unwrap()));
}

fn solve(c: &mut Criterion) {
    let mut g = c.benchmark_group("minimize");
    g.sample_size(10);
    for nodes in [64, 256] {
        let p = benchmark_problem(nodes);
        g.bench_function(BenchmarkId::new("smooth_benchmark", nodes), |b| b.iter(|| minimize(&p, Init::Auto).unwrap()));
    }
    g.finish();
}

criterion_group!(kernels, action_and_residual, conjugates, projection, solve);
criterion_main!(kernels);
