// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// Bloch vector (x, y, z) with z = ρ00 − ρ11.
type Bloch = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelState {
    pub rho: [[Complex64; 2]; 2],
}

impl TwoLevelState {
    pub fn excited() -> Self {
        Self::from_bloch([0.0, 0.0, 1.0])
    }

    pub fn ground() -> Self {
        Self::from_bloch([0.0, 0.0, -1.0])
    }

    pub fn from_bloch(r: Bloch) -> Self {
        let [x, y, z] = r;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        Self {
            rho: [
                [c(0.5 * (1.0 + z), 0.0), c(0.5 * x, -0.5 * y)],
                [c(0.5 * x, 0.5 * y), c(0.5 * (1.0 - z), 0.0)],
            ],
        }
    }

    pub fn bloch(&self) -> Bloch {
        let r01 = self.rho[0][1];
        [
            2.0 * r01.re,
            -2.0 * r01.im,
            (self.rho[0][0] - self.rho[1][1]).re,
        ]
    }

    pub fn trace(&self) -> Complex64 {
        self.rho[0][0] + self.rho[1][1]
    }

    pub fn hermiticity_error(&self) -> f64 {
        let r = &self.rho;
        (r[0][1] - r[1][0].conj())
            .norm()
            .max(r[0][0].im.abs())
            .max(r[1][1].im.abs())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let [x, y, z] = self.bloch();
        0.5 * (1.0 - (x * x + y * y + z * z).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_error() > 1e-12 {
            return Err(Error::Domain("density matrix is not Hermitian".into()));
        }
        if (self.trace() - 1.0).norm() > 1e-12 {
            return Err(Error::Domain("density matrix trace differs from 1".into()));
        }
        if self.min_eigenvalue() < -1e-10 {
            return Err(Error::Domain(
                "density matrix has a negative eigenvalue".into(),
            ));
        }
        Ok(())
    }

    pub fn rho00(&self) -> f64 {
        self.rho[0][0].re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Markovian,
    Exponential,
}

/// K(s) = A·exp(−Γ s), or a plain Lindblad rate γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    /// A (1/s²).
    pub amplitude_a: f64,
    /// Γ (1/s).
    pub gamma_memory: f64,
    /// γ (1/s).
    pub markovian_gamma: f64,
    pub kind: KernelKind,
}

impl KernelSpec {
    pub fn exponential(amplitude_a: f64, gamma_memory: f64) -> Self {
        Self {
            amplitude_a,
            gamma_memory,
            markovian_gamma: 0.0,
            kind: KernelKind::Exponential,
        }
    }

    /// Frozen underdamped kernel: Γ = 2π·5 MHz, A = Γ².
    pub fn default_memory() -> Self {
        let g = 2.0 * std::f64::consts::PI * 5e6;
        Self::exponential(g * g, g)
    }

    /// Memory kernel whose Γ → ∞ limit is Lindblad decay at rate γ.
    pub fn markov_equivalent(gamma: f64, gamma_memory: f64) -> Self {
        Self {
            markovian_gamma: gamma,
            ..Self::exponential(gamma * gamma_memory, gamma_memory)
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("amplitude_a", self.amplitude_a),
            ("gamma_memory", self.gamma_memory),
            ("markovian_gamma", self.markovian_gamma),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.kind == KernelKind::Exponential && !(self.gamma_memory > 0.0) {
            return Err(Error::Config(
                "exponential kernel needs gamma_memory > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Population trace with the full Bloch vector at each grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub t: Vec<f64>,
    pub rho00: Vec<f64>,
    pub bloch: Vec<Bloch>,
}

impl Trace {
    pub fn states(&self) -> impl Iterator<Item = TwoLevelState> + '_ {
        self.bloch.iter().map(|&b| TwoLevelState::from_bloch(b))
    }

    /// Smallest density-matrix eigenvalue over the trace.
    pub fn min_eigenvalue(&self) -> f64 {
        self.states()
            .map(|s| s.min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_physical(&self) -> bool {
        self.states().all(|s| s.validate().is_ok())
    }
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::Precondition("empty time grid".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition(
            "time grid must be finite and sorted".into(),
        ));
    }
    Ok(())
}

fn trace_from(t_grid: &[f64], bloch: Vec<Bloch>) -> Trace {
    Trace {
        t: t_grid.to_vec(),
        rho00: bloch.iter().map(|b| 0.5 * (1.0 + b[2])).collect(),
        bloch,
    }
}

/// Closed-form amplitude damping: ρ00(t) = ρ00(t0)·e^{−γ(t − t0)}.
pub fn evolve_markovian(state: &TwoLevelState, gamma: f64, t_grid: &[f64]) -> Result<Trace> {
    state.validate()?;
    check_grid(t_grid)?;
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Config(format!("gamma must be >= 0, got {gamma}")));
    }
    let [x, y, z] = state.bloch();
    let t0 = t_grid[0];
    let bloch = t_grid
        .iter()
        .map(|&t| {
            let e = (-gamma * (t - t0)).exp();
            let h = (-0.5 * gamma * (t - t0)).exp();
            [x * h, y * h, (1.0 + z) * e - 1.0]
        })
        .collect();
    Ok(trace_from(t_grid, bloch))
}

fn rk4<const N: usize>(y: &mut [f64; N], h: f64, f: impl Fn(&[f64; N]) -> [f64; N]) {
    let add = |a: &[f64; N], b: &[f64; N], s: f64| -> [f64; N] {
        std::array::from_fn(|i| a[i] + s * b[i])
    };
    let k1 = f(y);
    let k2 = f(&add(y, &k1, 0.5 * h));
    let k3 = f(&add(y, &k2, 0.5 * h));
    let k4 = f(&add(y, &k3, h));
    for i in 0..N {
        y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

/// Dissipator D[ρ] for L = σ⁻ in Bloch form.
#[inline]
fn dissipator(r: &[f64]) -> Bloch {
    [-0.5 * r[0], -0.5 * r[1], -(1.0 + r[2])]
}

fn integrate<const N: usize>(
    t_grid: &[f64],
    y0: [f64; N],
    h_max: f64,
    f: impl Fn(&[f64; N]) -> [f64; N],
) -> Result<Vec<[f64; N]>> {
    let mut y = y0;
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y);
    for w in t_grid.windows(2) {
        let span = w[1] - w[0];
        if span > 0.0 {
            let n = (span / h_max).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                rk4(&mut y, h, &f);
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Blowup(format!(
                "non-finite state at t = {:e} s",
                w[1]
            )));
        }
        out.push(y);
    }
    Ok(out)
}

/// RK4 integration of the Lindblad equation with L = σ⁻, H = 0.
pub fn evolve_markovian_rk4(state: &TwoLevelState, gamma: f64, t_grid: &[f64]) -> Result<Trace> {
    state.validate()?;
    check_grid(t_grid)?;
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::Config(format!("gamma must be >= 0, got {gamma}")));
    }
    let h_max = if gamma > 0.0 {
        0.01 / gamma
    } else {
        f64::INFINITY
    };
    let ys = integrate(t_grid, state.bloch(), h_max, |r| {
        let d = dissipator(r);
        [gamma * d[0], gamma * d[1], gamma * d[2]]
    })?;
    Ok(trace_from(t_grid, ys))
}

/// Memory-kernel master equation via an auxiliary variable.
///
/// dM/dt = −Γ M + A·D[ρ], dρ/dt = M, with M(t0) = 0. Integrated by RK4 on
/// the Bloch components of ρ and M; the internal step never exceeds
/// 1/100 of the fastest kernel time scale.
pub fn evolve_kernel(state: &TwoLevelState, kernel: &KernelSpec, t_grid: &[f64]) -> Result<Trace> {
    state.validate()?;
    check_grid(t_grid)?;
    kernel.validate()?;
    if kernel.kind != KernelKind::Exponential {
        return Err(Error::Precondition(
            "evolve_kernel needs an exponential kernel".into(),
        ));
    }
    let (a, g) = (kernel.amplitude_a, kernel.gamma_memory);
    let rate = g.max(a.sqrt());
    let h_max = 0.01 / rate;
    let r0 = state.bloch();
    let y0 = [r0[0], r0[1], r0[2], 0.0, 0.0, 0.0];
    let ys = integrate(t_grid, y0, h_max, |y| {
        let d = dissipator(&y[..3]);
        [
            y[3],
            y[4],
            y[5],
            -g * y[3] + a * d[0],
            -g * y[4] + a * d[1],
            -g * y[5] + a * d[2],
        ]
    })?;
    let bloch: Vec<Bloch> = ys.iter().map(|y| [y[0], y[1], y[2]]).collect();
    let trace = trace_from(t_grid, bloch);
    for s in trace.states() {
        if (s.trace() - 1.0).norm() > 1e-6 {
            return Err(Error::Convergence("trace drifted by more than 1e-6".into()));
        }
    }
    Ok(trace)
}

fn uniform_step(t: &[f64]) -> Result<f64> {
    let h = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(h > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h) {
        return Err(Error::Precondition(
            "gamma_eff needs a uniform, increasing grid".into(),
        ));
    }
    Ok(h)
}

fn derivative5(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let c = 1.0 / (12.0 * h);
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                c * (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2])
            } else if i == 0 {
                c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4])
            } else if i == 1 {
                c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4])
            } else if i == n - 2 {
                -c * (-3.0 * f[n - 1] - 10.0 * f[n - 2] + 18.0 * f[n - 3] - 6.0 * f[n - 4]
                    + f[n - 5])
            } else {
                -c * (-25.0 * f[n - 1] + 48.0 * f[n - 2] - 36.0 * f[n - 3] + 16.0 * f[n - 4]
                    - 3.0 * f[n - 5])
            }
        })
        .collect()
}

/// Quadratic Savitzky-Golay smoothing; the ends keep their raw values.
fn smooth_quadratic(x: &[f64], window: usize) -> Vec<f64> {
    let m = (window / 2) as i64;
    let n = x.len();
    if m == 0 || n < window {
        return x.to_vec();
    }
    let mf = m as f64;
    let norm = (2.0 * mf - 1.0) * (2.0 * mf + 1.0) * (2.0 * mf + 3.0);
    let w: Vec<f64> = (-m..=m)
        .map(|k| (3.0 * (3.0 * mf * mf + 3.0 * mf - 1.0) - 15.0 * (k * k) as f64) / norm)
        .collect();
    let m = m as usize;
    (0..n)
        .map(|i| {
            if i < m || i + m >= n {
                x[i]
            } else {
                w.iter().enumerate().map(|(j, c)| c * x[i + j - m]).sum()
            }
        })
        .collect()
}

/// γ_eff(t) = −d ln ρ00/dt on a uniform grid.
///
/// `smoothing_window` is an odd sample count (≥ 5) for quadratic smoothing,
/// or `None` for the bare 5-point stencil.
pub fn gamma_eff(t: &[f64], rho00: &[f64], smoothing_window: Option<usize>) -> Result<Vec<f64>> {
    if t.len() != rho00.len() {
        return Err(Error::Precondition("t and rho00 lengths differ".into()));
    }
    if t.len() < 5 {
        return Err(Error::Precondition(
            "gamma_eff needs at least 5 samples".into(),
        ));
    }
    if let Some(w) = smoothing_window {
        if w < 5 || w % 2 == 0 {
            return Err(Error::Precondition(format!(
                "smoothing window must be odd and >= 5, got {w}"
            )));
        }
    }
    if let Some(k) = rho00.iter().position(|&p| !(p > 0.0)) {
        return Err(Error::Domain(format!(
            "population {} at sample {k} is not positive",
            rho00[k]
        )));
    }
    let h = uniform_step(t)?;
    let ln: Vec<f64> = rho00.iter().map(|p| p.ln()).collect();
    let d: Vec<f64> = derivative5(&ln, h).iter().map(|x| -x).collect();
    Ok(match smoothing_window {
        Some(w) => smooth_quadratic(&d, w),
        None => d,
    })
}

/// γ_eff over one contiguous run of positive population.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSegment {
    /// Index of the first sample in the source grid.
    pub start: usize,
    pub t: Vec<f64>,
    pub gamma_eff: Vec<f64>,
}

impl RateSegment {
    /// Longest contiguous interval with γ_eff < 0, as (t_start, t_end).
    pub fn negative_interval(&self) -> Option<(f64, f64)> {
        let mut best: Option<(usize, usize)> = None;
        let mut cur: Option<usize> = None;
        for (k, &g) in self.gamma_eff.iter().enumerate() {
            match (g < 0.0, cur) {
                (true, None) => cur = Some(k),
                (false, Some(s)) => {
                    if best.is_none_or(|(a, b)| k - 1 - s > b - a) {
                        best = Some((s, k - 1));
                    }
                    cur = None;
                }
                _ => {}
            }
        }
        if let Some(s) = cur {
            let e = self.gamma_eff.len() - 1;
            if best.is_none_or(|(a, b)| e - s > b - a) {
                best = Some((s, e));
            }
        }
        best.map(|(a, b)| (self.t[a], self.t[b]))
    }
}

/// [`gamma_eff`] on every maximal run of at least 5 positive samples.
pub fn gamma_eff_segments(
    t: &[f64],
    rho00: &[f64],
    smoothing_window: Option<usize>,
) -> Result<Vec<RateSegment>> {
    if t.len() != rho00.len() {
        return Err(Error::Precondition("t and rho00 lengths differ".into()));
    }
    let min_len = smoothing_window.unwrap_or(5).max(5);
    let mut out = Vec::new();
    let mut k = 0;
    while k < t.len() {
        if rho00[k] > 0.0 {
            let s = k;
            while k < t.len() && rho00[k] > 0.0 {
                k += 1;
            }
            if k - s >= min_len {
                out.push(RateSegment {
                    start: s,
                    t: t[s..k].to_vec(),
                    gamma_eff: gamma_eff(&t[s..k], &rho00[s..k], smoothing_window)?,
                });
            }
        } else {
            k += 1;
        }
    }
    Ok(out)
}
