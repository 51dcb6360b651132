// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use stmbus_core::error_budget::array_budget;
use stmbus_core::nonmarkov::{evolve_kernel, ramsey};
use stmbus_core::stpm_line::build_line;
use stmbus_core::transmon::diagonalize;
use stmbus_core::{
    BusIsolationModel, FluxDrive, KernelSpec, LineGeometry, NoiseModel, Port, QubitArraySpec,
    SourceSpec, TimeStep, TransmonSpec, TwoLevelState,
};

const OMEGA: f64 = 2.0 * PI * 20e9;

fn line(c: &mut Criterion) {
    let g = LineGeometry::default();
    let d = FluxDrive::traveling(0.6, 0.6, &g, OMEGA).unwrap();
    let src = SourceSpec::cw(OMEGA, 1e-6, Port::Left);
    c.bench_function("line_1000_steps_512", |b| {
        b.iter_batched(
            || build_line(g, d, src, TimeStep::Auto).unwrap(),
            |mut sim| {
                for _ in 0..1000 {
                    sim.step().unwrap();
                }
                black_box(sim.state().t)
            },
            BatchSize::SmallInput,
        )
    });
    c.bench_function("line_run_0.8ns", |b| {
        b.iter(|| {
            let mut s = build_line(g, d, src, TimeStep::Auto).unwrap();
            black_box(s.run_until(0.8e-9, &[]).unwrap())
        })
    });
}

fn transmon(c: &mut Criterion) {
    let spec = TransmonSpec::new(0.25e9, 25e9);
    c.bench_function("diagonalize_ncut20", |b| {
        b.iter(|| black_box(diagonalize(&spec, 50e9).unwrap()))
    });
}

fn budget(c: &mut Criterion) {
    let a = QubitArraySpec::comb(25);
    let m = BusIsolationModel::reciprocal(a.omega_m);
    c.bench_function("array_budget_25", |b| {
        b.iter(|| black_box(array_budget(&a, &m).unwrap()))
    });
}

fn nonmarkov(c: &mut Criterion) {
    let k = KernelSpec::default_memory();
    let e = TwoLevelState::excited();
    let grid: Vec<f64> = (0..=4000).map(|i| 2e-6 * i as f64 / 4000.0).collect();
    c.bench_function("evolve_kernel_4000", |b| {
        b.iter(|| black_box(evolve_kernel(&e, &k, &grid).unwrap()))
    });
    let noise = NoiseModel::one_over_f(3e8, 1.0, 1e4, 200);
    let tau: Vec<f64> = (0..=40).map(|i| 2e-6 * i as f64).collect();
    c.bench_function("ramsey_200_realizations", |b| {
        b.iter(|| black_box(ramsey(&noise, &tau, 200, 0).unwrap()))
    });
}

criterion_group!(benches, line, transmon, budget, nonmarkov);
criterion_main!(benches);
