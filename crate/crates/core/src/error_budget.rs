// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate-error model for a comb-addressed qubit array on a shared bus.
//!
//! Per qubit i at ω_i = n_i·ωm:
//!
//! ```text
//! Γ_P     = (g_eff²/κ) · (κ²/4) / ((ω_i − ω_res)² + κ²/4) · C_Purcell,  g_eff = g/√G(ω_i)
//! 1/T1    = 1/T1,int + Γ_P
//! 1/T2    = 1/(2 T1) + Γ_φ C_φ,                                     Γ_φ = 1/T2,int − 1/(2 T1,int)
//! E_xt    = (1/G(ω_i)) Σ_j (g_ij/Δ_ij)² P_ij C_bus(Δ_ij)
//! E_total = T_gate/T1 + (1 − exp(−T_gate/T2)) + E_xt
//! ```
//!
//! with g_ij = g·exp(−|x_i − x_j|/λc) and C_bus(Δ) = C0 + (1 − C0)·exp(−(Δ/Δ_BW)²).
//! P_ij is the swap phase factor, see [`SwapPhase`].

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// ħ/(2e)² in ohms.
pub const R_Q: f64 = 1.054571817e-34 / (4.0 * 1.602176634e-19 * 1.602176634e-19);

/// How sin²(Δ T_gate / 2) enters the crosstalk sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SwapPhase {
    /// sin² replaced by its mean 1/2.
    Averaged,
    /// sin²(Δ T_gate / 2) evaluated as written.
    Instantaneous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QubitArraySpec {
    pub n_qubits: usize,
    /// Comb spacing (rad/s).
    pub omega_m: f64,
    pub harmonic_indices: Vec<u32>,
    /// Positions in units of `lambda_c`'s length unit.
    pub positions: Vec<f64>,
    pub t1_intrinsic: f64,
    pub t2_intrinsic: f64,
    /// Qubit-bus coupling g (rad/s).
    pub g_coupling: f64,
    /// Bus linewidth κ (rad/s).
    pub kappa_bus: f64,
    pub t_gate: f64,
    /// Coupling decay length, same unit as `positions`.
    pub lambda_c: f64,
    pub swap_phase: SwapPhase,
}

impl QubitArraySpec {
    /// Comb of `n` qubits on teeth 1..=n at unit pitch with the frozen constants.
    pub fn comb(n: usize) -> Self {
        Self {
            n_qubits: n,
            omega_m: 2.0 * PI * 3e9,
            harmonic_indices: (1..=n as u32).collect(),
            positions: (1..=n).map(|i| i as f64).collect(),
            t1_intrinsic: 150e-6,
            t2_intrinsic: 20e-6,
            g_coupling: 2.0 * PI * 50e6,
            kappa_bus: 2.0 * PI * 100e6,
            t_gate: 20e-9,
            lambda_c: 0.32,
            swap_phase: SwapPhase::Averaged,
        }
    }

    /// Same constants, comb resized to `n` teeth.
    pub fn resized(&self, n: usize) -> Self {
        let pitch = if self.positions.len() >= 2 {
            self.positions[1] - self.positions[0]
        } else {
            1.0
        };
        let x0 = self.positions.first().copied().unwrap_or(pitch);
        Self {
            n_qubits: n,
            harmonic_indices: (1..=n as u32).collect(),
            positions: (0..n).map(|i| x0 + i as f64 * pitch).collect(),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_qubits;
        if n == 0 {
            return Err(Error::Config("n_qubits must be >= 1".into()));
        }
        if self.harmonic_indices.len() != n || self.positions.len() != n {
            return Err(Error::Config(
                "harmonic_indices and positions must have n_qubits entries".into(),
            ));
        }
        if self.harmonic_indices.windows(2).any(|w| w[1] <= w[0]) || self.harmonic_indices[0] == 0 {
            return Err(Error::Config(
                "harmonic indices must be positive and strictly increasing".into(),
            ));
        }
        if self.positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("positions must be finite".into()));
        }
        for (name, v) in [
            ("omega_m", self.omega_m),
            ("t1_intrinsic", self.t1_intrinsic),
            ("t2_intrinsic", self.t2_intrinsic),
            ("kappa_bus", self.kappa_bus),
            ("t_gate", self.t_gate),
            ("lambda_c", self.lambda_c),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.g_coupling.is_finite() && self.g_coupling >= 0.0) {
            return Err(Error::Config("g_coupling must be >= 0".into()));
        }
        if self.t2_intrinsic > 2.0 * self.t1_intrinsic {
            return Err(Error::Config(
                "t2_intrinsic must not exceed 2 t1_intrinsic".into(),
            ));
        }
        Ok(())
    }

    /// ω_i (rad/s), zero-based index.
    pub fn omega(&self, i: usize) -> f64 {
        self.harmonic_indices[i] as f64 * self.omega_m
    }

    /// Intrinsic pure-dephasing rate 1/T2,int − 1/(2 T1,int).
    pub fn gamma_phi(&self) -> f64 {
        1.0 / self.t2_intrinsic - 0.5 / self.t1_intrinsic
    }

    /// Zero-based index of the qubit on tooth `n`.
    pub fn index_of_harmonic(&self, n: u32) -> Option<usize> {
        self.harmonic_indices.iter().position(|&h| h == n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BusKind {
    Reciprocal,
    Nonreciprocal,
}

/// G(ω) = floor + (peak − floor)·exp(−(ω − center)²/(2 width²)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainProfile {
    pub peak: f64,
    /// rad/s
    pub center: f64,
    /// rad/s
    pub width: f64,
    pub floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BusIsolationModel {
    pub kind: BusKind,
    pub c_purcell: f64,
    pub c_phi: f64,
    pub c0: f64,
    /// rad/s
    pub delta_bw: f64,
    /// rad/s
    pub omega_res: f64,
    pub gain_profile: GainProfile,
    pub z_base_slope: f64,
}

impl BusIsolationModel {
    /// Frozen reciprocal calibration for comb spacing `omega_m`.
    pub fn reciprocal(omega_m: f64) -> Self {
        Self {
            kind: BusKind::Reciprocal,
            c_purcell: 1.0,
            c_phi: 1.0,
            c0: 0.63,
            delta_bw: 1.8 * omega_m,
            omega_res: 65.0 * omega_m,
            gain_profile: GainProfile {
                peak: 0.1,
                center: 69.0 * omega_m,
                width: 14.0 * omega_m,
                floor: 1.26e-4,
            },
            z_base_slope: 1.0,
        }
    }

    /// Frozen nonreciprocal calibration for comb spacing `omega_m`.
    pub fn nonreciprocal(omega_m: f64) -> Self {
        let omega_res = 65.0 * omega_m;
        Self {
            kind: BusKind::Nonreciprocal,
            c_purcell: 0.005,
            c_phi: 0.02,
            c0: 0.01,
            delta_bw: 0.3 * omega_m,
            omega_res,
            gain_profile: GainProfile {
                peak: 2.0,
                center: omega_res,
                width: 8.0 * omega_m,
                floor: 0.5,
            },
            z_base_slope: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_purcell > 0.0 && self.c_purcell <= 1.0) {
            return Err(Error::Config(format!(
                "c_purcell must lie in (0, 1], got {}",
                self.c_purcell
            )));
        }
        if !(self.c_phi > 0.0 && self.c_phi <= 1.0) {
            return Err(Error::Config(format!(
                "c_phi must lie in (0, 1], got {}",
                self.c_phi
            )));
        }
        if !(self.c0 > 0.0 && self.c0 < 1.0) {
            return Err(Error::Config(format!(
                "c0 must lie in (0, 1), got {}",
                self.c0
            )));
        }
        let g = &self.gain_profile;
        if !(g.floor > 0.0 && g.peak > 0.0 && g.width > 0.0 && g.center.is_finite()) {
            return Err(Error::Config(
                "gain profile needs floor, peak, width > 0".into(),
            ));
        }
        if !(self.delta_bw > 0.0 && self.omega_res > 0.0 && self.z_base_slope >= 0.0) {
            return Err(Error::Config(
                "delta_bw and omega_res must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Insertion gain G(ω).
pub fn gain(model: &BusIsolationModel, omega: f64) -> f64 {
    let g = &model.gain_profile;
    let x = (omega - g.center) / g.width;
    g.floor + (g.peak - g.floor) * (-0.5 * x * x).exp()
}

/// Residual bus transmission C_bus(Δ).
pub fn c_bus(model: &BusIsolationModel, delta: f64) -> f64 {
    let x = delta / model.delta_bw;
    model.c0 + (1.0 - model.c0) * (-x * x).exp()
}

fn check_index(array: &QubitArraySpec, i: usize) -> Result<()> {
    if i >= array.n_qubits {
        return Err(Error::Precondition(format!(
            "qubit index {i} out of range for N = {}",
            array.n_qubits
        )));
    }
    Ok(())
}

/// Lorentzian Purcell rate (1/s) of qubit `i`.
pub fn purcell_rate(array: &QubitArraySpec, model: &BusIsolationModel, i: usize) -> Result<f64> {
    check_index(array, i)?;
    let w = array.omega(i);
    let k = array.kappa_bus;
    let g_eff2 = array.g_coupling * array.g_coupling / gain(model, w);
    let dw = w - model.omega_res;
    let lorentz = 0.25 * k * k / (dw * dw + 0.25 * k * k);
    Ok(g_eff2 / k * lorentz * model.c_purcell)
}

/// Γ = (ω_q/2)(Re Z/R_Q)(C_c/C_Σ)².
pub fn purcell_rate_impedance(omega_q: f64, re_z_env: f64, c_ratio: f64) -> Result<f64> {
    if !(re_z_env >= 0.0) {
        return Err(Error::Domain(format!("Re Z must be >= 0, got {re_z_env}")));
    }
    if !(c_ratio > 0.0 && c_ratio < 1.0) {
        return Err(Error::Domain(format!(
            "c_ratio must lie in (0, 1), got {c_ratio}"
        )));
    }
    Ok(0.5 * omega_q * re_z_env / R_Q * c_ratio * c_ratio)
}

/// Dispersive environment impedance Z_Base(ω)·C_Purcell/G(ω), Z_Base = z_base·slope·ω/ωm.
pub fn environment_impedance(
    model: &BusIsolationModel,
    z_base: f64,
    omega: f64,
    omega_m: f64,
) -> f64 {
    z_base * model.z_base_slope * omega / omega_m * model.c_purcell / gain(model, omega)
}

pub fn t1_effective(array: &QubitArraySpec, model: &BusIsolationModel, i: usize) -> Result<f64> {
    Ok(1.0 / (1.0 / array.t1_intrinsic + purcell_rate(array, model, i)?))
}

pub fn t2_effective(array: &QubitArraySpec, model: &BusIsolationModel, i: usize) -> Result<f64> {
    if array.t2_intrinsic > 2.0 * array.t1_intrinsic {
        return Err(Error::Precondition(
            "t2_intrinsic must not exceed 2 t1_intrinsic".into(),
        ));
    }
    let t1 = t1_effective(array, model, i)?;
    Ok(1.0 / (0.5 / t1 + array.gamma_phi() * model.c_phi))
}

/// Coherent leakage into qubit `i` from every other comb tooth.
pub fn crosstalk_error(array: &QubitArraySpec, model: &BusIsolationModel, i: usize) -> Result<f64> {
    check_index(array, i)?;
    if array.n_qubits == 1 {
        return Ok(0.0);
    }
    let wi = array.omega(i);
    let mut sum = 0.0;
    for j in 0..array.n_qubits {
        if j == i {
            continue;
        }
        let delta = (wi - array.omega(j)).abs();
        if delta == 0.0 {
            return Err(Error::Domain(format!("qubits {i} and {j} are degenerate")));
        }
        let gij = array.g_coupling
            * (-(array.positions[i] - array.positions[j]).abs() / array.lambda_c).exp();
        let phase = match array.swap_phase {
            SwapPhase::Averaged => 0.5,
            SwapPhase::Instantaneous => (0.5 * delta * array.t_gate).sin().powi(2),
        };
        sum += (gij / delta).powi(2) * phase * c_bus(model, delta);
    }
    Ok(sum / gain(model, wi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBudget {
    /// Zero-based qubit index.
    pub qubit: usize,
    pub omega_over_omega_m: f64,
    pub t1_eff: f64,
    pub t2_eff: f64,
    pub e_relax: f64,
    pub e_dephase: f64,
    pub e_crosstalk: f64,
    pub e_total: f64,
}

pub fn gate_error(
    array: &QubitArraySpec,
    model: &BusIsolationModel,
    i: usize,
) -> Result<ErrorBudget> {
    array.validate()?;
    model.validate()?;
    check_index(array, i)?;
    let t1 = t1_effective(array, model, i)?;
    let t2 = t2_effective(array, model, i)?;
    let e_relax = array.t_gate / t1;
    let e_dephase = 1.0 - (-array.t_gate / t2).exp();
    let e_crosstalk = crosstalk_error(array, model, i)?;
    Ok(ErrorBudget {
        qubit: i,
        omega_over_omega_m: array.omega(i) / array.omega_m,
        t1_eff: t1,
        t2_eff: t2,
        e_relax,
        e_dephase,
        e_crosstalk,
        e_total: e_relax + e_dephase + e_crosstalk,
    })
}

/// Budgets for every qubit of the array.
pub fn array_budget(array: &QubitArraySpec, model: &BusIsolationModel) -> Result<Vec<ErrorBudget>> {
    (0..array.n_qubits)
        .map(|i| gate_error(array, model, i))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalabilityPoint {
    pub n: usize,
    pub worst_case_error: f64,
}

/// Worst-case e_total for combs of each size in `n_range`.
pub fn scalability_sweep(
    template: &QubitArraySpec,
    model: &BusIsolationModel,
    n_range: &[usize],
) -> Result<Vec<ScalabilityPoint>> {
    if n_range.is_empty() {
        return Err(Error::Precondition("n_range is empty".into()));
    }
    n_range
        .iter()
        .map(|&n| {
            let arr = template.resized(n);
            let worst = array_budget(&arr, model)?
                .iter()
                .map(|b| b.e_total)
                .fold(0.0, f64::max);
            Ok(ScalabilityPoint {
                n,
                worst_case_error: worst,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetDecomposition {
    pub budget: ErrorBudget,
    /// e_relax − T_gate/T1,int.
    pub purcell: f64,
    pub relax_fraction: f64,
    pub dephase_fraction: f64,
    pub crosstalk_fraction: f64,
}

impl BudgetDecomposition {
    pub fn labeled(&self) -> [(&'static str, f64, f64); 3] {
        let b = &self.budget;
        [
            ("relaxation", b.e_relax, self.relax_fraction),
            ("dephasing", b.e_dephase, self.dephase_fraction),
            ("crosstalk", b.e_crosstalk, self.crosstalk_fraction),
        ]
    }

    pub fn dominant(&self) -> &'static str {
        let l = self.labeled();
        l.iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|x| x.0)
            .unwrap_or("relaxation")
    }
}

/// Components of qubit `i`'s error and their shares of e_total.
pub fn budget_decomposition(
    array: &QubitArraySpec,
    model: &BusIsolationModel,
    i: usize,
) -> Result<BudgetDecomposition> {
    let b = gate_error(array, model, i)?;
    let frac = |x: f64| if b.e_total > 0.0 { x / b.e_total } else { 0.0 };
    Ok(BudgetDecomposition {
        purcell: (b.e_relax - array.t_gate / array.t1_intrinsic).max(0.0),
        relax_fraction: frac(b.e_relax),
        dephase_fraction: frac(b.e_dephase),
        crosstalk_fraction: frac(b.e_crosstalk),
        budget: b,
    })
}

/// Intrinsic floor T_gate/T1,int + 1 − exp(−T_gate·Γ_φ·c_phi).
pub fn intrinsic_floor(array: &QubitArraySpec, model: &BusIsolationModel) -> f64 {
    array.t_gate / array.t1_intrinsic + 1.0
        - (-array.t_gate * array.gamma_phi() * model.c_phi).exp()
}
