// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};

const MAX_ITER: usize = 500;
const BETA_MAX: f64 = 4.0;
const BETA_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayModel {
    Exponential,
    StretchedExponential,
}

impl DecayModel {
    pub fn label(&self) -> &'static str {
        match self {
            DecayModel::Exponential => "exponential",
            DecayModel::StretchedExponential => "stretched-exponential",
        }
    }
}

/// y = exp(−(t/T)^β).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub model: DecayModel,
    pub timescale: f64,
    pub beta: f64,
    /// RMS of y − model over the fitted samples.
    pub residual: f64,
}

/// Leading samples before the first y ≤ lo, keeping those with y ≤ hi.
///
/// Stopping at the first crossing keeps Monte Carlo floor fluctuations out
/// of the fit.
pub fn select_for_fit(t: &[f64], y: &[f64], lo: f64, hi: f64) -> (Vec<f64>, Vec<f64>) {
    t.iter()
        .zip(y)
        .take_while(|(_, &y)| y > lo)
        .filter(|(_, &y)| y <= hi)
        .map(|(t, y)| (*t, *y))
        .unzip()
}

fn cost(t: &[f64], y: &[f64], ln_t: f64, beta: f64) -> f64 {
    t.iter()
        .zip(y)
        .map(|(&t, &y)| {
            let s = (beta * (t.ln() - ln_t)).exp();
            let r = y * (y.ln() + s);
            r * r
        })
        .sum()
}

/// Starting point from the line ln(−ln y) = β ln t − β ln T.
fn initial_guess(t: &[f64], y: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(y)
        .filter(|(_, &y)| y > 1e-6 && y < 1.0 - 1e-6)
        .map(|(&t, &y)| (t.ln(), (-y.ln()).ln()))
        .collect();
    if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx > 0.0 {
            let beta = (sxy / sxx).clamp(0.2, BETA_MAX);
            return (mx - my / beta, beta);
        }
    }
    let mean = t.iter().sum::<f64>() / t.len() as f64;
    (mean.ln(), 1.0)
}

/// Damped Gauss-Newton fit of exp(−(t/T)^β) on residuals y·(ln y + (t/T)^β).
///
/// Samples at t ≤ 0 carry no information about (T, β) and are skipped.
pub fn fit_decay(t: &[f64], y: &[f64], model: DecayModel) -> Result<DecayFit> {
    if t.len() != y.len() {
        return Err(Error::Precondition("t and y lengths differ".into()));
    }
    if t.len() < 8 {
        return Err(Error::Precondition(format!(
            "need >= 8 samples, got {}",
            t.len()
        )));
    }
    if y.iter().any(|&y| !(y > 0.0 && y <= 1.0)) {
        return Err(Error::Precondition("samples must lie in (0, 1]".into()));
    }
    let (tp, yp): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(y)
        .filter(|(&t, _)| t > 0.0)
        .map(|(t, y)| (*t, *y))
        .unzip();
    if tp.len() < 2 {
        return Err(Error::Precondition("need >= 2 samples at t > 0".into()));
    }
    let fixed_beta = model == DecayModel::Exponential;
    let (mut ln_t, mut beta) = initial_guess(&tp, &yp);
    if fixed_beta {
        beta = 1.0;
    }
    let mut c = cost(&tp, &yp, ln_t, beta);
    let mut lambda = 1e-3;
    let mut converged = false;
    for _ in 0..MAX_ITER {
        // Normal equations on (ln T, β).
        let (mut a11, mut a12, mut a22, mut g1, mut g2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (&t, &y) in tp.iter().zip(&yp) {
            let lt = t.ln() - ln_t;
            let s = (beta * lt).exp();
            let r = y * (y.ln() + s);
            let j1 = -y * beta * s;
            let j2 = y * s * lt;
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            g1 += j1 * r;
            g2 += j2 * r;
        }
        let (d1, d2) = if fixed_beta {
            (-g1 / (a11 * (1.0 + lambda)), 0.0)
        } else {
            let m11 = a11 * (1.0 + lambda);
            let m22 = a22 * (1.0 + lambda);
            let det = m11 * m22 - a12 * a12;
            if det == 0.0 || !det.is_finite() {
                return Err(Error::Convergence("singular normal equations".into()));
            }
            ((-g1 * m22 + g2 * a12) / det, (-g2 * m11 + g1 * a12) / det)
        };
        let nt = ln_t + d1;
        let nb = (beta + d2).clamp(BETA_MIN, BETA_MAX);
        let nc = cost(&tp, &yp, nt, nb);
        if nc.is_finite() && nc <= c {
            let small = d1.abs() < 1e-12 && (d2.abs() < 1e-12 || fixed_beta);
            let flat = c - nc <= 1e-15 * c.max(f64::MIN_POSITIVE);
            ln_t = nt;
            beta = nb;
            c = nc;
            lambda = (lambda / 3.0).max(1e-12);
            if small || flat {
                converged = true;
                break;
            }
        } else {
            lambda *= 4.0;
            if lambda > 1e12 {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(Error::Convergence(format!(
            "no convergence after {MAX_ITER} iterations"
        )));
    }
    let timescale = ln_t.exp();
    let residual = (t
        .iter()
        .zip(y)
        .map(|(&t, &y)| {
            let m = if t > 0.0 {
                (-(t / timescale).powf(beta)).exp()
            } else {
                1.0
            };
            (y - m).powi(2)
        })
        .sum::<f64>()
        / t.len() as f64)
        .sqrt();
    Ok(DecayFit {
        model,
        timescale,
        beta,
        residual,
    })
}
