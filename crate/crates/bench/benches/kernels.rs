use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use roadfront::spectra::{dispersion_lambda, lambda0, mu_thresholds};
use roadfront::{ColumnModel, ColumnState, IgnitionNonlinearity, PhysicalParams};
use roadfront_bench::{reference_data, reference_model};

fn step(c: &mut Criterion) {
    let m = reference_model();
    let s = reference_data(&m);
    let dt = m.max_dt();
    c.bench_function("step_400x50", |b| {
        b.iter(|| m.step(black_box(&s), dt).unwrap())
    });

    let mut wide = m.clone();
    wide.scheme.road_substeps = 8;
    c.bench_function("step_400x50_8_substeps", |b| {
        b.iter(|| wide.step(black_box(&s), dt).unwrap())
    });
}

fn column(c: &mut Criterion) {
    let p = PhysicalParams::new(1.0, 1.0, 1.4, 5.0, Default::default()).unwrap();
    let m = ColumnModel::new(p, 21, IgnitionNonlinearity::default(), 0.9).unwrap();
    let s = ColumnState {
        t: 0.0,
        u: 0.5,
        v: vec![0.6; 21],
    };
    c.bench_function("column_step_21", |b| b.iter(|| m.step(black_box(&s), m.dt)));
}

fn spectra(c: &mut Criterion) {
    c.bench_function("dispersion_lambda", |b| {
        b.iter(|| dispersion_lambda(black_box(0.05), 1.4, 0.1, 5.0).unwrap())
    });
    c.bench_function("lambda0", |b| b.iter(|| lambda0(black_box(5.0)).unwrap()));
    let consts = IgnitionNonlinearity::default().derive_constants().unwrap();
    let p = PhysicalParams::new(1.0, 1.0, 1.4, 5.0, Default::default()).unwrap();
    c.bench_function("mu_thresholds", |b| {
        b.iter(|| mu_thresholds(&consts, black_box(&p), 0.3, 2.5).unwrap())
    });
}

criterion_group!(benches, step, column, spectra);
criterion_main!(benches);
