use criterion::{black_box, criterion_group, criterion_main, Criterion};

use jleg::acs::{builtin, check_identities_seeded};
use jleg::forms::{comass, verify_semicalibration, Form2H};

fn forms(c: &mut Criterion) {
    let w = Form2H::new(0.3, -0.7, 0.2, 0.9, -0.4, 0.1);
    c.bench_function("comass", |b| b.iter(|| comass(black_box(&w))));
    let theta = 0.7f64;
    let s = Form2H::new(0.0, theta.cos(), theta.sin(), 0.0, 0.0, 0.0);
    c.bench_function("verify_semicalibration", |b| b.iter(|| verify_semicalibration(black_box(&s))));
}

fn identities(c: &mut Criterion) {
    let acs = builtin::perturbed(0.1, 3, jleg::Coeffs::STANDARD);
    c.bench_function("identities x1000", |b| b.iter(|| check_identities_seeded(black_box(&acs), 1000, 1)));
}

criterion_group!(benches, forms, identities);
criterion_main!(benches);
