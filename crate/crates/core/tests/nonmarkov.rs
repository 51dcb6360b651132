// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

mod common;

use std::f64::consts::{LN_2, PI};

use common::{linspace, slope};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use stmbus_core::nonmarkov::{
    evolve_kernel, evolve_markovian, evolve_markovian_rk4, fit_decay, gamma_eff,
    gamma_eff_segments, hahn_echo, ramsey, select_for_fit, synthesize_noise,
};
use stmbus_core::{
    DecayModel, Error, KernelKind, KernelSpec, NoiseKind, NoiseModel, TwoLevelState,
};

/// Excited population under ρ̇00 = −A ∫₀ᵗ e^{−Γ(t−τ)} ρ00(τ) dτ.
///
/// Product trapezoid for the convolution, trapezoid in time, O(n²); returns
/// samples every `stride` steps.
fn volterra_trapezoid(a: f64, g: f64, t_end: f64, n: usize) -> Vec<f64> {
    let h = t_end / n as f64;
    let mut p = vec![1.0; n + 1];
    let mut f_prev = 0.0;
    for k in 1..=n {
        let mut s = 0.5 * (-g * k as f64 * h).exp() * p[0];
        for (j, pj) in p.iter().enumerate().take(k).skip(1) {
            s += (-g * (k - j) as f64 * h).exp() * pj;
        }
        s *= h;
        p[k] = (p[k - 1] + 0.5 * h * (f_prev - a * s)) / (1.0 + 0.25 * a * h * h);
        f_prev = -a * (s + 0.5 * h * p[k]);
    }
    p
}

/// Romberg extrapolation of the trapezoid solution on the coarse grid of `n` steps.
fn volterra_oracle(a: f64, g: f64, t_end: f64, n: usize, levels: usize) -> Vec<f64> {
    let mut table: Vec<Vec<f64>> = (0..levels)
        .map(|l| {
            let m = 1 << l;
            let fine = volterra_trapezoid(a, g, t_end, n * m);
            fine.iter().step_by(m).copied().collect()
        })
        .collect();
    for order in 1..levels {
        let f = 4f64.powi(order as i32);
        for l in (order..levels).rev() {
            let next: Vec<f64> = table[l]
                .iter()
                .zip(&table[l - 1])
                .map(|(x, y)| (f * x - y) / (f - 1.0))
                .collect();
            table[l] = next;
        }
    }
    table.pop().unwrap()
}

/// ρ00 for p'' + Γp' + Ap = 0, p(0) = 1, p'(0) = 0.
fn damped_oscillator(a: f64, g: f64, t: f64) -> f64 {
    let disc = a - 0.25 * g * g;
    if disc > 0.0 {
        let w = disc.sqrt();
        (-0.5 * g * t).exp() * ((w * t).cos() + 0.5 * g / w * (w * t).sin())
    } else {
        let s = (-disc).sqrt();
        let (r1, r2) = (-0.5 * g + s, -0.5 * g - s);
        (r2 * (r1 * t).exp() - r1 * (r2 * t).exp()) / (r2 - r1)
    }
}

#[test]
fn kernel_matches_volterra_quadrature() {
    let k = KernelSpec::default_memory();
    let t_end = 1e-6;
    let n = 500;
    let oracle = volterra_oracle(k.amplitude_a, k.gamma_memory, t_end, n, 4);
    let grid = linspace(0.0, t_end, n + 1);
    let tr = evolve_kernel(&TwoLevelState::excited(), &k, &grid).unwrap();
    let worst = tr
        .rho00
        .iter()
        .zip(&oracle)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    assert!(worst < 1e-6, "max deviation {worst:e}");
}

#[test]
fn kernel_matches_closed_form_oscillator() {
    for (a, g) in [
        (KernelSpec::default_memory().amplitude_a, 2.0 * PI * 5e6),
        (1e12, 1e8),
    ] {
        let grid = linspace(0.0, 2e-6, 401);
        let tr = evolve_kernel(
            &TwoLevelState::excited(),
            &KernelSpec::exponential(a, g),
            &grid,
        )
        .unwrap();
        for (t, p) in grid.iter().zip(&tr.rho00) {
            assert!((p - damped_oscillator(a, g, *t)).abs() < 1e-9);
        }
    }
}

#[test]
fn markovian_closed_form_cases() {
    let grid = linspace(0.0, 5e-6, 51);
    let flat = evolve_markovian(&TwoLevelState::excited(), 0.0, &grid).unwrap();
    assert!(flat.rho00.iter().all(|&p| p == 1.0));
    let gamma = 1e6;
    let half = evolve_markovian(&TwoLevelState::excited(), gamma, &[0.0, LN_2 / gamma]).unwrap();
    assert!((half.rho00[1] - 0.5).abs() < 1e-15);
}

#[test]
fn rk4_matches_closed_form() {
    let gamma = 1e6;
    let grid = linspace(0.0, 10e-6, 201);
    let start = TwoLevelState::from_bloch([0.6, 0.0, 0.8]);
    let a = evolve_markovian(&start, gamma, &grid).unwrap();
    let b = evolve_markovian_rk4(&start, gamma, &grid).unwrap();
    for (x, y) in a.rho00.iter().zip(&b.rho00) {
        assert!((x - y).abs() < 1e-8);
    }
    for (x, y) in a.bloch.iter().zip(&b.bloch) {
        assert!((x[0] - y[0]).abs() < 1e-8);
    }
    assert!(a.is_physical() && b.is_physical());
}

#[test]
fn memoryless_limit_approaches_lindblad() {
    let gamma = 1e6;
    let grid = linspace(0.0, 5e-6, 501);
    let mut errs = Vec::new();
    for ratio in [25.0, 100.0, 400.0] {
        let k = KernelSpec::markov_equivalent(gamma, ratio * gamma);
        let tr = evolve_kernel(&TwoLevelState::excited(), &k, &grid).unwrap();
        let worst = tr
            .rho00
            .iter()
            .zip(&grid)
            .map(|(p, t)| (p - (-gamma * t).exp()).abs())
            .fold(0.0, f64::max);
        assert!(tr.is_physical());
        errs.push(worst);
    }
    assert!(errs[1] < 0.02, "{errs:?}");
    // O(γ/Γ): quadrupling Γ cuts the error by about four.
    assert!(errs[1] / errs[2] > 3.0 && errs[0] / errs[1] > 3.0);
}

#[test]
fn kernel_keeps_trace_and_hermiticity() {
    let grid = linspace(0.0, 2e-6, 801);
    let start = TwoLevelState::from_bloch([0.3, -0.4, 0.5]);
    let tr = evolve_kernel(&start, &KernelSpec::default_memory(), &grid).unwrap();
    for s in tr.states() {
        assert!((s.trace() - 1.0).norm() < 1e-12);
        assert!(s.hermiticity_error() < 1e-12);
    }
}

#[test]
fn default_kernel_decays_non_exponentially_with_backflow() {
    let grid = linspace(0.0, 2e-6, 4001);
    let tr = evolve_kernel(
        &TwoLevelState::excited(),
        &KernelSpec::default_memory(),
        &grid,
    )
    .unwrap();
    let segs = gamma_eff_segments(&grid, &tr.rho00, Some(7)).unwrap();
    assert!(!segs.is_empty());
    let neg = segs
        .iter()
        .find_map(|s| s.negative_interval())
        .expect("no backflow interval");
    assert!(neg.1 > neg.0 && neg.1 < 2e-6);
    // The population revives after its first minimum.
    let first_min = tr.rho00.windows(2).position(|w| w[1] > w[0]).unwrap();
    assert!(tr.rho00[first_min + 10] > tr.rho00[first_min]);
}

#[test]
fn kernel_rejects_a_markovian_spec() {
    let k = KernelSpec {
        kind: KernelKind::Markovian,
        ..KernelSpec::markov_equivalent(1e6, 1e8)
    };
    assert!(matches!(
        evolve_kernel(&TwoLevelState::excited(), &k, &[0.0, 1e-6]).unwrap_err(),
        Error::Precondition(_)
    ));
    assert!(KernelSpec::exponential(1.0, 0.0).validate().is_err());
    assert!(KernelSpec::exponential(-1.0, 1.0).validate().is_err());
}

#[test]
fn state_validation() {
    assert!(TwoLevelState::excited().validate().is_ok());
    assert!(TwoLevelState::from_bloch([0.0, 0.0, 1.2])
        .validate()
        .is_err());
    let mut s = TwoLevelState::ground();
    s.rho[0][0].re += 1e-9;
    assert!(s.validate().is_err());
    assert_eq!(TwoLevelState::excited().rho00(), 1.0);
    assert_eq!(TwoLevelState::ground().rho00(), 0.0);
}

#[test]
fn gamma_eff_of_an_exponential_is_flat() {
    let gamma = 2.5e6;
    let grid = linspace(0.0, 3e-6, 301);
    let p: Vec<f64> = grid.iter().map(|t| 0.9 * (-gamma * t).exp()).collect();
    for w in [None, Some(7)] {
        let g = gamma_eff(&grid, &p, w).unwrap();
        assert!(g.iter().all(|x| (x / gamma - 1.0).abs() < 1e-6));
    }
    let flat = gamma_eff(&grid, &vec![0.4; grid.len()], Some(5)).unwrap();
    assert!(flat.iter().all(|x| x.abs() < 1e-6));
}

#[test]
fn gamma_eff_preconditions() {
    let grid = linspace(0.0, 1.0, 10);
    let mut p = vec![0.5; 10];
    p[4] = 0.0;
    assert!(matches!(
        gamma_eff(&grid, &p, None).unwrap_err(),
        Error::Domain(_)
    ));
    assert!(gamma_eff(&grid[..4], &[0.5; 4], None).is_err());
    assert!(gamma_eff(&grid, &[0.5; 10], Some(6)).is_err());
    let uneven = [0.0, 0.1, 0.3, 0.4, 0.5, 0.6];
    assert!(gamma_eff(&uneven, &[0.5; 6], None).is_err());
}

#[test]
fn gamma_eff_integrates_back_to_the_trace() {
    let grid = linspace(0.0, 2e-6, 2001);
    let k = KernelSpec::exponential(4e12, 1e7);
    let tr = evolve_kernel(&TwoLevelState::excited(), &k, &grid).unwrap();
    assert!(tr.rho00.iter().all(|&p| p > 0.0));
    let g = gamma_eff(&grid, &tr.rho00, None).unwrap();
    let mut integral = 0.0;
    for i in 1..grid.len() {
        integral += 0.5 * (g[i] + g[i - 1]) * (grid[i] - grid[i - 1]);
        let rebuilt = tr.rho00[0] * (-integral).exp();
        assert!((rebuilt - tr.rho00[i]).abs() < 1e-4);
    }
}

#[test]
fn markovian_gamma_eff_is_constant() {
    let gamma = 1e6;
    let grid = linspace(0.0, 5e-6, 501);
    let tr = evolve_markovian_rk4(&TwoLevelState::excited(), gamma, &grid).unwrap();
    let g = gamma_eff(&grid, &tr.rho00, Some(7)).unwrap();
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    let sd = (g.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / g.len() as f64).sqrt();
    assert!(sd / mean < 1e-3);
}

/// Hann-windowed periodogram averaged over realizations, then summed in log bins.
fn binned_density(
    model: &NoiseModel,
    duration: f64,
    dt: f64,
    reals: u64,
    edges: &[f64],
) -> Vec<f64> {
    let n = (duration / dt).floor() as usize + 1;
    let w: Vec<f64> = (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
        .collect();
    let w2: f64 = w.iter().map(|x| x * x).sum();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut acc = vec![0.0; n / 2];
    for r in 0..reals {
        let x = synthesize_noise(model, duration, dt, 100 + r).unwrap();
        let mut buf: Vec<Complex64> = x
            .iter()
            .zip(&w)
            .map(|(x, w)| Complex64::new(x * w, 0.0))
            .collect();
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    // One-sided density 2|X|²·dt/Σw².
    let df = 1.0 / (n as f64 * dt);
    let dens: Vec<f64> = acc
        .iter()
        .map(|p| 2.0 * p * dt / w2 / reals as f64)
        .collect();
    edges
        .windows(2)
        .map(|e| {
            let (lo, hi) = ((e[0] / df).ceil() as usize, (e[1] / df).floor() as usize);
            dens[lo..=hi].iter().sum::<f64>() * df / (e[1] - e[0])
        })
        .collect()
}

fn one_over_f() -> NoiseModel {
    NoiseModel::one_over_f(3e8, 1.0, 1e4, 200)
}

fn filtered() -> NoiseModel {
    NoiseModel {
        kind: NoiseKind::Filtered,
        filter_center: 3e3,
        filter_depth: 10.0,
        filter_q: 3.0,
        ..one_over_f()
    }
}

#[test]
fn synthesized_one_over_f_has_unit_slope() {
    let edges: Vec<f64> = (0..=12)
        .map(|k| 10f64 * 10f64.powf(k as f64 / 4.0))
        .collect();
    let d = binned_density(&one_over_f(), 1.0, 5e-5, 200, &edges[..11]);
    let centres: Vec<f64> = edges[..11]
        .windows(2)
        .map(|e| (e[0] * e[1]).sqrt().log10())
        .collect();
    let logd: Vec<f64> = d.iter().map(|x| x.log10()).collect();
    let s = slope(&centres, &logd);
    assert!((s + 1.0).abs() < 0.15, "slope {s}");
    // Absolute level against S(f) = amplitude/f.
    let mid = 10f64.powf(centres[5]);
    assert!((d[5] / (3e8 / mid)).log10().abs() < 0.1);
}

#[test]
fn filter_carves_a_notch() {
    let edges = [3e3 / 1.1, 3e3 * 1.1];
    let plain = binned_density(&one_over_f(), 0.2, 5e-5, 20, &edges)[0];
    let notched = binned_density(&filtered(), 0.2, 5e-5, 20, &edges)[0];
    let db = 10.0 * (plain / notched).log10();
    assert!(db >= 10.0 - 3.0, "suppression {db} dB");
}

#[test]
fn zero_noise_is_silent() {
    let m = NoiseModel {
        amplitude: 0.0,
        ..one_over_f()
    };
    assert!(synthesize_noise(&m, 1e-3, 1e-6, 1)
        .unwrap()
        .iter()
        .all(|&x| x == 0.0));
    let tau = linspace(0.0, 50e-6, 11);
    assert!(ramsey(&m, &tau, 200, 1)
        .unwrap()
        .iter()
        .all(|&c| (c - 1.0).abs() < 1e-15));
    assert!(hahn_echo(&m, &tau, 200, 1)
        .unwrap()
        .iter()
        .all(|&c| (c - 1.0).abs() < 1e-15));
}

#[test]
fn noise_is_reproducible_under_a_seed() {
    let a = synthesize_noise(&one_over_f(), 1e-2, 1e-5, 42).unwrap();
    let b = synthesize_noise(&one_over_f(), 1e-2, 1e-5, 42).unwrap();
    let c = synthesize_noise(&one_over_f(), 1e-2, 1e-5, 43).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    let tau = linspace(0.0, 40e-6, 9);
    assert_eq!(
        ramsey(&one_over_f(), &tau, 200, 5).unwrap(),
        ramsey(&one_over_f(), &tau, 200, 5).unwrap()
    );
}

#[test]
fn monte_carlo_preconditions() {
    let tau = [0.0, 1e-6];
    assert!(matches!(
        ramsey(&one_over_f(), &tau, 199, 1).unwrap_err(),
        Error::Precondition(_)
    ));
    assert!(hahn_echo(&one_over_f(), &[-1.0], 200, 1).is_err());
    let bad = NoiseModel {
        n_components: 50,
        ..one_over_f()
    };
    assert!(bad.validate().is_err());
    assert!(NoiseModel::one_over_f(1.0, 10.0, 1.0, 200)
        .validate()
        .is_err());
}

fn stretched_beta(tau: &[f64], y: &[f64], lo: f64) -> f64 {
    let (t, y) = select_for_fit(tau, y, lo, 1.0);
    fit_decay(&t, &y, DecayModel::StretchedExponential)
        .unwrap()
        .beta
}

#[test]
fn white_noise_ramsey_is_exponential() {
    let m = NoiseModel {
        kind: NoiseKind::White,
        amplitude: 2e5,
        f_min: 1e3,
        f_max: 1e9,
        n_components: 2000,
        ..one_over_f()
    };
    let tau = linspace(0.0, 30e-6, 61);
    let r = ramsey(&m, &tau, 500, 11).unwrap();
    let beta = stretched_beta(&tau, &r, 0.1);
    assert!((beta - 1.0).abs() < 0.1, "beta {beta}");
}

#[test]
fn one_over_f_ramsey_is_stretched_and_echo_refocuses() {
    let tau = linspace(0.0, 80e-6, 41);
    let r = ramsey(&one_over_f(), &tau, 500, 3).unwrap();
    let e = hahn_echo(&one_over_f(), &tau, 500, 3).unwrap();
    let beta = stretched_beta(&tau, &r, 0.1);
    assert!((1.5..=2.5).contains(&beta), "beta {beta}");
    for (x, y) in e.iter().zip(&r) {
        assert!(x >= y);
    }
}

#[test]
fn echo_exponents_order_one_over_f_above_filtered() {
    let tau = linspace(0.0, 250e-6, 51);
    let b1 = stretched_beta(&tau, &hahn_echo(&one_over_f(), &tau, 500, 3).unwrap(), 0.2);
    let b2 = stretched_beta(&tau, &hahn_echo(&filtered(), &tau, 500, 3).unwrap(), 0.2);
    assert!(b1 > b2);
    assert!((b1 - 3.0).abs() <= 0.5, "1/f echo beta {b1}");
    assert!((b2 - 2.0).abs() <= 0.5, "filtered echo beta {b2}");
}

#[test]
fn fit_recovers_exact_decays() {
    let t = linspace(0.0, 30e-6, 40);
    let tt = 10e-6;
    let y1: Vec<f64> = t.iter().map(|t| (-t / tt).exp()).collect();
    let f = fit_decay(&t, &y1, DecayModel::StretchedExponential).unwrap();
    assert!((f.beta - 1.0).abs() < 0.01 && (f.timescale / tt - 1.0).abs() < 0.01);
    let fe = fit_decay(&t, &y1, DecayModel::Exponential).unwrap();
    assert_eq!(fe.beta, 1.0);
    assert!((fe.timescale / tt - 1.0).abs() < 1e-6 && fe.residual < 1e-9);
    let y2: Vec<f64> = t
        .iter()
        .map(|t| (-(t / tt).powi(2)).exp())
        .filter(|y| *y > 1e-12)
        .collect();
    let f2 = fit_decay(&t[..y2.len()], &y2, DecayModel::StretchedExponential).unwrap();
    assert!((f2.beta - 2.0).abs() < 0.02);
}

#[test]
fn fit_tolerates_measurement_noise() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let t = linspace(0.0, 25e-6, 60);
    for beta in [1.0, 1.5, 2.0, 3.0] {
        let y: Vec<f64> = t
            .iter()
            .map(|t| {
                // Box-Muller normal deviate with σ = 0.01.
                let (u1, u2): (f64, f64) = (rng.random::<f64>().max(1e-300), rng.random());
                let n = (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos();
                (-(t / 10e-6).powf(beta)).exp() + 0.01 * n
            })
            .collect();
        let (ts, ys) = select_for_fit(&t, &y, 0.05, 1.0);
        let f = fit_decay(&ts, &ys, DecayModel::StretchedExponential).unwrap();
        assert!((f.beta - beta).abs() < 0.1, "{beta} -> {}", f.beta);
    }
}

#[test]
fn fit_preconditions() {
    let t = linspace(0.0, 1.0, 7);
    assert!(matches!(
        fit_decay(&t, &[0.5; 7], DecayModel::Exponential).unwrap_err(),
        Error::Precondition(_)
    ));
    let t = linspace(0.0, 1.0, 9);
    let mut y = vec![0.5; 9];
    y[3] = 0.0;
    assert!(fit_decay(&t, &y, DecayModel::Exponential).is_err());
    assert_eq!(
        DecayModel::StretchedExponential.label(),
        "stretched-exponential"
    );
}
