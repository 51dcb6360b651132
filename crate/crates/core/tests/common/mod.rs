// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

#![allow(dead_code)]

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use stmbus_core::stpm_line::{build_line, Simulator, TimeStep};
use stmbus_core::{FluxDrive, LineGeometry, Port, SourceSpec};

/// Line excitation tone.
pub const OMEGA_M: f64 = 2.0 * PI * 20e9;
pub const AMPLITUDE: f64 = 1e-6;

pub fn cw_line(geom: LineGeometry, dc: f64, rf: f64) -> Simulator {
    let drive = FluxDrive::traveling(dc, rf, &geom, OMEGA_M).unwrap();
    build_line(
        geom,
        drive,
        SourceSpec::cw(OMEGA_M, AMPLITUDE, Port::Left),
        TimeStep::Auto,
    )
    .unwrap()
}

/// Fraction of Hann-windowed spatial power above 1.5·k1.
pub fn high_k_fraction(v: &[f64], dz: f64, k1: f64) -> f64 {
    let n = v.len();
    let mut buf: Vec<Complex64> = v
        .iter()
        .enumerate()
        .map(|(i, x)| {
            Complex64::new(
                x * (0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos()),
                0.0,
            )
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dk = 2.0 * PI / (n as f64 * dz);
    let (mut hi, mut tot) = (0.0, 0.0);
    for (i, x) in buf.iter().enumerate().take(n / 2) {
        let p = x.norm_sqr();
        tot += p;
        if i as f64 * dk > 1.5 * k1 {
            hi += p;
        }
    }
    hi / tot
}

/// Wavenumber of a dispersionless line with per-cell L and C.
pub fn k_uniform(omega: f64, l_cell: f64, c_cell: f64, dz: f64) -> f64 {
    omega * (l_cell * c_cell).sqrt() / dz
}

/// Least-squares slope of y against x.
pub fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| a + (b - a) * k as f64 / (n - 1) as f64)
        .collect()
}
