// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    OneOverF,
    /// 1/f with a log-Gaussian notch.
    Filtered,
    /// Flat spectrum over the band.
    White,
}

/// One-sided frequency-noise spectrum S(f) in (rad/s)²/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// S(f) = amplitude/f (1/f kinds) or amplitude (white).
    pub amplitude: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub filter_center: f64,
    /// Suppression at `filter_center` (dB).
    pub filter_depth: f64,
    /// Notch width as a frequency ratio (one standard deviation in ln f).
    pub filter_q: f64,
    pub n_components: usize,
}

impl NoiseModel {
    pub fn one_over_f(amplitude: f64, f_min: f64, f_max: f64, n_components: usize) -> Self {
        Self {
            kind: NoiseKind::OneOverF,
            amplitude,
            f_min,
            f_max,
            filter_center: (f_min * f_max).sqrt(),
            filter_depth: 0.0,
            filter_q: 3.0,
            n_components,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_min > 0.0 && self.f_min < self.f_max && self.f_max.is_finite()) {
            return Err(Error::Config(format!(
                "need 0 < f_min < f_max, got [{}, {}]",
                self.f_min, self.f_max
            )));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::Config("noise amplitude must be >= 0".into()));
        }
        if self.n_components < 100 {
            return Err(Error::Config(format!(
                "n_components must be >= 100, got {}",
                self.n_components
            )));
        }
        if self.kind == NoiseKind::Filtered
            && !(self.filter_center > 0.0 && self.filter_depth >= 0.0 && self.filter_q > 1.0)
        {
            return Err(Error::Config(
                "filter needs center > 0, depth >= 0, q > 1".into(),
            ));
        }
        Ok(())
    }

    /// Target spectral density at `f`.
    pub fn psd(&self, f: f64) -> f64 {
        match self.kind {
            NoiseKind::White => self.amplitude,
            NoiseKind::OneOverF => self.amplitude / f,
            NoiseKind::Filtered => {
                let r = (f / self.filter_center).ln() / self.filter_q.ln();
                self.amplitude / f * 10f64.powf(-self.filter_depth / 10.0 * (-0.5 * r * r).exp())
            }
        }
    }

    /// Log-spaced component frequencies (Hz) and amplitudes √(2 S Δf).
    pub fn components(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_components;
        let (l0, l1) = (self.f_min.ln(), self.f_max.ln());
        let edge = |k: usize| (l0 + (l1 - l0) * k as f64 / n as f64).exp();
        (0..n)
            .map(|k| {
                let (a, b) = (edge(k), edge(k + 1));
                let f = (a * b).sqrt();
                (f, (2.0 * self.psd(f) * (b - a)).sqrt())
            })
            .unzip()
    }
}

fn phases(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| 2.0 * PI * rng.random::<f64>()).collect()
}

/// δω(t) sampled at t = k·dt, k = 0..⌊duration/dt⌋.
pub fn synthesize_noise(model: &NoiseModel, duration: f64, dt: f64, seed: u64) -> Result<Vec<f64>> {
    model.validate()?;
    if !(dt > 0.0 && duration >= 0.0) {
        return Err(Error::Config("need dt > 0 and duration >= 0".into()));
    }
    let (f, a) = model.components();
    let ph = phases(f.len(), seed);
    let n = (duration / dt).floor() as usize + 1;
    let mut out = vec![0.0; n];
    for ((f, a), p) in f.iter().zip(&a).zip(&ph) {
        // Phasor recurrence, re-anchored every 1024 samples.
        let w = 2.0 * PI * f * dt;
        let (rs, rc) = w.sin_cos();
        for (b, chunk) in out.chunks_mut(1024).enumerate() {
            let (mut s, mut c) = (w * (b * 1024) as f64 + p).sin_cos();
            for x in chunk {
                *x += a * c;
                (c, s) = (c * rc - s * rs, s * rc + c * rs);
            }
        }
    }
    Ok(out)
}

fn check_mc(model: &NoiseModel, tau: &[f64], n_realizations: usize) -> Result<()> {
    model.validate()?;
    if n_realizations < 200 {
        return Err(Error::Precondition(format!(
            "need >= 200 realizations, got {n_realizations}"
        )));
    }
    if tau.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Precondition("delays must be finite and >= 0".into()));
    }
    Ok(())
}

/// |⟨e^{iφ(τ)}⟩| over realizations seeded `seed + r`.
fn average_contrast(
    model: &NoiseModel,
    tau: &[f64],
    n_realizations: usize,
    seed: u64,
    phase: impl Fn(f64, f64, f64, f64) -> f64 + Sync,
) -> Vec<f64> {
    let (f, a) = model.components();
    let w: Vec<f64> = f.iter().map(|f| 2.0 * PI * f).collect();
    let per: Vec<Vec<(f64, f64)>> = (0..n_realizations as u64)
        .into_par_iter()
        .map(|r| {
            let ph = phases(w.len(), seed.wrapping_add(r));
            tau.iter()
                .map(|&t| {
                    let phi: f64 = w
                        .iter()
                        .zip(&a)
                        .zip(&ph)
                        .map(|((w, a), p)| phase(*w, *a, *p, t))
                        .sum();
                    (phi.cos(), phi.sin())
                })
                .collect()
        })
        .collect();
    (0..tau.len())
        .map(|k| {
            let (mut c, mut s) = (0.0, 0.0);
            for r in &per {
                c += r[k].0;
                s += r[k].1;
            }
            (c * c + s * s).sqrt() / n_realizations as f64
        })
        .collect()
}

/// Free-induction contrast |⟨exp(i∫₀^τ δω dt)⟩|.
pub fn ramsey(
    model: &NoiseModel,
    tau: &[f64],
    n_realizations: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_mc(model, tau, n_realizations)?;
    Ok(average_contrast(
        model,
        tau,
        n_realizations,
        seed,
        |w, a, p, t| a / w * ((w * t + p).sin() - p.sin()),
    ))
}

/// Echo amplitude with a refocusing pulse at τ/2.
pub fn hahn_echo(
    model: &NoiseModel,
    tau: &[f64],
    n_realizations: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    check_mc(model, tau, n_realizations)?;
    Ok(average_contrast(
        model,
        tau,
        n_realizations,
        seed,
        |w, a, p, t| {
            let mid = (0.5 * w * t + p).sin();
            a / w * (2.0 * mid - p.sin() - (w * t + p).sin())
        },
    ))
}
