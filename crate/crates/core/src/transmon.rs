// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Transmon spectra in the charge basis, flux tuning, dispersive shift and
//! comb addressing maps.
//!
//! Energies are frequencies in Hz (E/h). Comb and linewidth parameters of
//! the addressing map are angular frequencies in rad/s.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Number of levels reported by [`diagonalize`].
pub const N_LEVELS: usize = 5;

/// Largest charge cutoff tried by the convergence loop.
pub const MAX_CHARGE_CUT: usize = 400;

const CUT_STEP: usize = 5;
const CONVERGENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonSpec {
    /// E_C/h (Hz).
    pub ec: f64,
    /// E_J,max/h (Hz).
    pub ej_max: f64,
    /// Offset charge.
    pub ng: f64,
    /// Charge states kept on each side of zero.
    pub n_charge_cut: usize,
}

impl TransmonSpec {
    pub fn new(ec: f64, ej_max: f64) -> Self {
        Self {
            ec,
            ej_max,
            ng: 0.0,
            n_charge_cut: 20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ec.is_finite() && self.ec > 0.0) {
            return Err(Error::Config(format!(
                "ec must be positive, got {}",
                self.ec
            )));
        }
        if !(self.ej_max.is_finite() && self.ej_max > 0.0) {
            return Err(Error::Config(format!(
                "ej_max must be positive, got {}",
                self.ej_max
            )));
        }
        if !self.ng.is_finite() {
            return Err(Error::Config("ng must be finite".into()));
        }
        if self.n_charge_cut < 10 {
            return Err(Error::Config(format!(
                "n_charge_cut must be >= 10, got {}",
                self.n_charge_cut
            )));
        }
        Ok(())
    }

    /// E_J,max/E_C ≥ 10.
    pub fn is_transmon_regime(&self) -> bool {
        self.ej_max / self.ec >= 10.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitSpectrum {
    /// Ground-referenced levels (Hz), ascending.
    pub levels: Vec<f64>,
    pub omega_q: f64,
    pub anharmonicity: f64,
    /// Cutoff at which the levels were accepted.
    pub n_charge_cut: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutSpec {
    /// Resonator frequency (Hz).
    pub omega_r: f64,
    /// Qubit-resonator coupling (Hz).
    pub g_r: f64,
}

/// 2·E_J,max·|cos(π Φ/Φ0)|.
pub fn ej_of_flux(ej_max: f64, phi_over_phi0: f64) -> f64 {
    2.0 * ej_max * (PI * phi_over_phi0).cos().abs()
}

/// Lowest `count` eigenvalues of the symmetric tridiagonal matrix with
/// diagonal `d` and off-diagonal `e`, by Sturm-sequence bisection.
pub fn tridiagonal_lowest(d: &[f64], e: &[f64], count: usize) -> Vec<f64> {
    let n = d.len();
    assert_eq!(e.len() + 1, n, "off-diagonal must have n - 1 entries");
    let count = count.min(n);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * scale * scale);
    let below = |x: f64| -> usize {
        let mut c = 0;
        let mut q = d[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            c += 1;
        }
        for i in 1..n {
            q = d[i] - x - e[i - 1] * e[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                c += 1;
            }
        }
        c
    };
    (0..count)
        .map(|k| {
            let (mut a, mut b) = (lo - f64::EPSILON * scale, hi + f64::EPSILON * scale);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b || b - a <= 2.0 * f64::EPSILON * scale {
                    break;
                }
                if below(mid) > k {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

fn lowest_at_cut(spec: &TransmonSpec, ej: f64, cut: usize, count: usize) -> Vec<f64> {
    let d: Vec<f64> = (0..=2 * cut)
        .map(|k| {
            let n = k as f64 - cut as f64;
            4.0 * spec.ec * (n - spec.ng).powi(2)
        })
        .collect();
    let e = vec![-0.5 * ej; 2 * cut];
    let raw = tridiagonal_lowest(&d, &e, count);
    raw.iter().map(|x| x - raw[0]).collect()
}

fn levels_at_cut(spec: &TransmonSpec, ej: f64, cut: usize) -> Vec<f64> {
    lowest_at_cut(spec, ej, cut, N_LEVELS)
}

/// Flux curve ω_q(Φ̃dc) with the cutoff verified once at the largest E_J.
///
/// E_J only falls with |Φ|, and a smaller E_J/E_C needs fewer charge
/// states, so the cutoff accepted at Φ = 0 holds along the whole curve.
struct FluxCurve {
    spec: TransmonSpec,
    cut: usize,
}

impl FluxCurve {
    fn new(spec: &TransmonSpec) -> Result<Self> {
        let cut = diagonalize(spec, ej_of_flux(spec.ej_max, 0.0))?.n_charge_cut;
        Ok(Self { spec: *spec, cut })
    }

    fn omega_q(&self, phi_dc_tilde: f64) -> f64 {
        let ej = ej_of_flux(self.spec.ej_max, flux_of_bias(phi_dc_tilde));
        lowest_at_cut(&self.spec, ej, self.cut, 2)[1]
    }
}

fn rel_shift(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Charge-basis spectrum at Josephson energy `ej` (Hz).
///
/// The cutoff grows in steps of 5 from `spec.n_charge_cut` until the top
/// two reported levels move by less than 1e-9 relative.
pub fn diagonalize(spec: &TransmonSpec, ej: f64) -> Result<QubitSpectrum> {
    spec.validate()?;
    if !(ej.is_finite() && ej >= 0.0) {
        return Err(Error::Domain(format!("ej must be >= 0, got {ej}")));
    }
    let mut cut = spec.n_charge_cut;
    let mut levels = levels_at_cut(spec, ej, cut);
    loop {
        if cut + CUT_STEP > MAX_CHARGE_CUT {
            return Err(Error::Convergence(format!(
                "charge basis not converged at cut {cut}"
            )));
        }
        let next = levels_at_cut(spec, ej, cut + CUT_STEP);
        let converged =
            (N_LEVELS - 2..N_LEVELS).all(|k| rel_shift(levels[k], next[k]) < CONVERGENCE_TOL);
        if converged {
            break;
        }
        cut += CUT_STEP;
        levels = next;
    }
    Ok(QubitSpectrum {
        omega_q: levels[1],
        anharmonicity: levels[2] - 2.0 * levels[1],
        levels,
        n_charge_cut: cut,
    })
}

/// Qubit frequency (Hz) at reduced flux Φ/Φ0.
pub fn qubit_frequency(spec: &TransmonSpec, phi_over_phi0: f64) -> Result<f64> {
    Ok(diagonalize(spec, ej_of_flux(spec.ej_max, phi_over_phi0))?.omega_q)
}

/// g_r / |ω_q − ω_r|.
pub fn dispersive_ratio(omega_q: f64, readout: &ReadoutSpec) -> f64 {
    readout.g_r.abs() / (omega_q - readout.omega_r).abs()
}

/// χ = (g²/Δ)(1 + α/Δ), Δ = ω_q − ω_r, all in Hz.
pub fn chi_dispersive(spec: &TransmonSpec, ej: f64, readout: &ReadoutSpec) -> Result<f64> {
    let s = diagonalize(spec, ej)?;
    chi_from(s.omega_q, s.anharmonicity, readout)
}

/// χ from an already known qubit frequency and anharmonicity.
pub fn chi_from(omega_q: f64, anharmonicity: f64, readout: &ReadoutSpec) -> Result<f64> {
    let delta = omega_q - readout.omega_r;
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::Domain(
            "qubit and resonator are degenerate (delta = 0)".into(),
        ));
    }
    let g2 = readout.g_r * readout.g_r;
    Ok(g2 / delta * (1.0 + anharmonicity / delta))
}

/// Qubit assigned to comb tooth `harmonic`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AddressedQubit {
    pub spec: TransmonSpec,
    pub harmonic: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AddressingSpec {
    /// Comb spacing (rad/s).
    pub omega_m: f64,
    /// Resonance width σ_res (rad/s).
    pub sigma_res: f64,
    pub qubits: Vec<AddressedQubit>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AddressingPoint {
    pub phi_dc: f64,
    pub phi_rf: f64,
    /// One-based qubit label.
    pub qubit_index: usize,
    pub score: f64,
}

/// Reduced qubit flux Φ/Φ0 seen at bus bias Φ̃dc.
pub fn flux_of_bias(phi_dc_tilde: f64) -> f64 {
    phi_dc_tilde / (2.0 * PI)
}

/// Resonance proximity exp(−(ω_q − n ωm)²/(2σ²)) per qubit over a bias grid.
///
/// Rows are ordered by Φ̃dc, then Φ̃rf, then qubit.
pub fn addressing_map(
    spec: &AddressingSpec,
    phi_dc: &[f64],
    phi_rf: &[f64],
) -> Result<Vec<AddressingPoint>> {
    if !(spec.omega_m > 0.0 && spec.sigma_res > 0.0) {
        return Err(Error::Config(
            "omega_m and sigma_res must be positive".into(),
        ));
    }
    let curves = spec
        .qubits
        .iter()
        .map(|q| FluxCurve::new(&q.spec))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(phi_dc.len() * phi_rf.len() * spec.qubits.len());
    for &dc in phi_dc {
        let scores: Vec<f64> = curves
            .iter()
            .zip(&spec.qubits)
            .map(|(c, q)| {
                let x =
                    (2.0 * PI * c.omega_q(dc) - q.harmonic as f64 * spec.omega_m) / spec.sigma_res;
                (-0.5 * x * x).exp()
            })
            .collect();
        for &rf in phi_rf {
            for (i, &score) in scores.iter().enumerate() {
                out.push(AddressingPoint {
                    phi_dc: dc,
                    phi_rf: rf,
                    qubit_index: i + 1,
                    score,
                });
            }
        }
    }
    Ok(out)
}

/// Bus bias Φ̃dc ∈ [0, π) at which the qubit sits at `target_hz`.
pub fn dc_bias_for(spec: &TransmonSpec, target_hz: f64) -> Result<f64> {
    let curve = FluxCurve::new(spec)?;
    let f = |dc: f64| curve.omega_q(dc);
    let (mut a, mut b) = (0.0, PI * (1.0 - 1e-9));
    let (fa, fb) = (f(a), f(b));
    if !(target_hz <= fa && target_hz >= fb) {
        return Err(Error::Domain(format!(
            "target {target_hz:e} Hz outside the tuning range [{fb:e}, {fa:e}]"
        )));
    }
    for _ in 0..100 {
        let m = 0.5 * (a + b);
        if f(m) > target_hz {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Josephson energy (Hz) giving qubit frequency `target_hz`.
fn ej_for_frequency(ec: f64, ng: f64, cut: usize, target_hz: f64) -> Result<f64> {
    let probe = TransmonSpec {
        ec,
        ej_max: 1.0,
        ng,
        n_charge_cut: cut,
    };
    let f = |ej: f64| Ok::<f64, Error>(diagonalize(&probe, ej)?.omega_q);
    let mut lo = 0.0;
    let mut hi = (target_hz + ec).powi(2) / (8.0 * ec) * 2.0 + ec;
    while f(hi)? < target_hz {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let m = 0.5 * (lo + hi);
        if f(m)? < target_hz {
            lo = m;
        } else {
            hi = m;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Comb of `n_qubits` transmons, qubit i on tooth i.
///
/// Qubit i is designed to reach i·ωm at a bias spread linearly from
/// `dc_first` (qubit 1) to `dc_last` (qubit N).
pub fn design_comb(
    n_qubits: usize,
    omega_m: f64,
    sigma_res: f64,
    ec: f64,
    dc_first: f64,
    dc_last: f64,
) -> Result<AddressingSpec> {
    if n_qubits == 0 {
        return Err(Error::Config("need at least one qubit".into()));
    }
    for dc in [dc_first, dc_last] {
        if !(0.0..PI).contains(&dc) {
            return Err(Error::Config(format!("design bias {dc} outside [0, pi)")));
        }
    }
    let fm = omega_m / (2.0 * PI);
    let qubits = (1..=n_qubits)
        .map(|i| {
            let frac = if n_qubits > 1 {
                (i - 1) as f64 / (n_qubits - 1) as f64
            } else {
                0.0
            };
            let dc = dc_first + frac * (dc_last - dc_first);
            let ej = ej_for_frequency(ec, 0.0, 20, i as f64 * fm)?;
            let ej_max = ej / ej_of_flux(1.0, flux_of_bias(dc));
            Ok(AddressedQubit {
                spec: TransmonSpec::new(ec, ej_max),
                harmonic: i as u32,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AddressingSpec {
        omega_m,
        sigma_res,
        qubits,
    })
}
