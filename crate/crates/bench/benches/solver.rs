use criterion::{black_box, criterion_group, criterion_main, Criterion};
use num_complex::Complex64;

use jleg::acs::builtin;
use jleg::elliptic::EllipticOperator;
use jleg::grid::{GridFunction, GridSpec};
use jleg::solver::{picard_solve, SolverConfig};
use jleg::{PlaneChart, Point5};

fn picard(c: &mut Criterion) {
    let acs = builtin::perturbed(0.01, 2, jleg::Coeffs::STANDARD);
    let p = Point5::new(0.0, 0.1, 0.1, 0.0, 0.0);
    let x = PlaneChart::new(Complex64::new(0.3, 0.2));
    let mut g = c.benchmark_group("picard");
    g.sample_size(10);
    for n in [33, 65] {
        let cfg = SolverConfig { n, ..SolverConfig::default() };
        g.bench_function(format!("n={n}"), |b| b.iter(|| picard_solve(black_box(&p), &x, &acs, &cfg).unwrap()));
    }
    g.finish();
}

fn elliptic(c: &mut Criterion) {
    let mut g = c.benchmark_group("elliptic");
    g.sample_size(20);
    for n in [33, 65] {
        let spec = GridSpec::unit(n).unwrap();
        g.bench_function(format!("factor n={n}"), |b| {
            b.iter(|| EllipticOperator::from_coeffs(black_box(spec), 0.1, 1.2).unwrap())
        });
        let op = EllipticOperator::from_coeffs(spec, 0.1, 1.2).unwrap();
        let rhs = GridFunction::from_fn(spec, |x, y| (x * y).sin());
        g.bench_function(format!("solve n={n}"), |b| b.iter(|| op.solve(black_box(&rhs)).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, picard, elliptic);
criterion_main!(benches);
