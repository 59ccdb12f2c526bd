use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hilfer_core::operators::{semigroup, Generator};
use hilfer_core::solver::{MildOperator, ProblemSpec};
use hilfer_core::specfun::mittag_leffler;
use hilfer_core::SubordinationControl;
use nalgebra::{DMatrix, DVector};

fn mittag_leffler_evaluation(c: &mut Criterion) {
    let mut g = c.benchmark_group("mittag_leffler");
    for z in [-0.5, -5.0, -40.0, 3.0] {
        g.bench_with_input(BenchmarkId::from_parameter(z), &z, |b, &z| {
            b.iter(|| mittag_leffler(black_box(0.5), black_box(0.75), black_box(z)).unwrap())
        });
    }
    g.finish();
}

fn nonlinear_problem() -> ProblemSpec {
    ProblemSpec::new(0.5, 0.5, 0.0, 1.0, Generator::scalar(1.0), DVector::from_element(1, 1.0))
        .unwrap()
        .with_source(Arc::new(|_, u: &DVector<f64>| u.map(|x| 0.3 * x.sin())))
        .with_kernel(Arc::new(|_, _, u: &DVector<f64>| u * 0.2))
}

fn apply_mild_operator(c: &mut Criterion) {
    let p = nonlinear_problem();
    let mut g = c.benchmark_group("apply_F");
    g.sample_size(20);
    for n in [64, 256, 1024] {
        let op = MildOperator::new(&p, p.grid(n).unwrap(), &SubordinationControl::default()).unwrap();
        let u = op.initial_iterate().unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| b.iter(|| op.apply(black_box(&u)).unwrap()));
    }
    g.finish();
}

fn matrix_exponential(c: &mut Criterion) {
    let mut g = c.benchmark_group("semigroup");
    for d in [1, 4, 16] {
        let m = DMatrix::from_fn(d, d, |i, j| if i == j { 2.0 } else { 0.1 / (1.0 + (i + j) as f64) });
        let gen = Generator::new(m).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| semigroup(&gen, black_box(0.7)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, mittag_leffler_evaluation, apply_mild_operator, matrix_exponential);
criterion_main!(benches);
