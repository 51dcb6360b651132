// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario configuration.
//!
//! Angular frequencies are written as ω/2π in the unit named by the key
//! suffix (`omega_m_ghz = 3` means ωm = 2π·3 GHz). Everything is converted
//! to SI before it reaches the core crate.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use stmbus_core::stpm_line::PHI0;
use stmbus_core::{
    BusIsolationModel, BusKind, FluxDrive, GainProfile, KernelSpec, LineGeometry, NoiseKind,
    NoiseModel, Port, QubitArraySpec, SourceSpec, SwapPhase, TimeStep,
};

use crate::error::CliError;
use crate::table::Format;

/// Shipped defaults; every calibrated constant lives here.
pub const DEFAULTS: &str = include_str!("../defaults.json");

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    LineSim,
    FluxSweep,
    Addressing,
    ErrorBudget,
    Scalability,
    Nonmarkov,
    Spectroscopy,
}

impl Scenario {
    pub const ALL: [Scenario; 7] = [
        Scenario::LineSim,
        Scenario::FluxSweep,
        Scenario::Addressing,
        Scenario::ErrorBudget,
        Scenario::Scalability,
        Scenario::Nonmarkov,
        Scenario::Spectroscopy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::LineSim => "line-sim",
            Scenario::FluxSweep => "flux-sweep",
            Scenario::Addressing => "addressing",
            Scenario::ErrorBudget => "error-budget",
            Scenario::Scalability => "scalability",
            Scenario::Nonmarkov => "nonmarkov",
            Scenario::Spectroscopy => "spectroscopy",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|x| x.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: Option<Scenario>,
    pub seed: u64,
    pub format: Format,
    pub output_dir: String,
    pub line: LineConfig,
    pub flux_sweep: FluxSweepConfig,
    pub transmon: TransmonConfig,
    pub budget: BudgetConfig,
    pub nonmarkov: NonMarkovConfig,
    pub spectroscopy: SpectroscopyConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKindConfig {
    Cw,
    Pulse,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortConfig {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub kind: SourceKindConfig,
    pub omega_ghz: f64,
    pub amplitude_v: f64,
    pub port: PortConfig,
    pub pulse_center_ns: f64,
    pub pulse_width_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    pub n_cells: usize,
    pub dz_um: f64,
    pub c_per_length_nf_per_m: f64,
    pub l_junction_ph: f64,
    pub margin_rad: f64,
    pub phi_dc_rad: f64,
    pub phi_rf_rad: f64,
    /// Spatial modulation periods along the line.
    pub modulation_periods: f64,
    pub omega_s_ghz: f64,
    pub phase_rad: f64,
    pub source: SourceConfig,
    /// `null` picks the CFL step.
    pub dt_ps: Option<f64>,
    pub t_end_ns: f64,
    pub snapshots_ns: Vec<f64>,
    /// Probe position as a fraction of the line length.
    pub probe_fraction: f64,
    pub window_ns: [f64; 2],
    pub n_harmonics: u32,
    pub isolation: bool,
    pub isolation_window_ns: [f64; 2],
}

impl LineConfig {
    pub fn geometry(&self) -> stmbus_core::Result<LineGeometry> {
        let i0 = PHI0 / (TAU * self.l_junction_ph * 1e-12);
        LineGeometry::new(
            self.n_cells,
            self.dz_um * 1e-6,
            self.c_per_length_nf_per_m * 1e-9,
            i0,
        )
    }

    pub fn drive(&self, geom: &LineGeometry) -> stmbus_core::Result<FluxDrive> {
        FluxDrive::with_margin(
            self.phi_dc_rad,
            self.phi_rf_rad,
            TAU * self.modulation_periods / geom.length(),
            TAU * self.omega_s_ghz * 1e9,
            self.phase_rad,
            self.margin_rad,
        )
    }

    pub fn source_spec(&self) -> SourceSpec {
        let s = &self.source;
        let omega = TAU * s.omega_ghz * 1e9;
        match s.kind {
            SourceKindConfig::Cw => SourceSpec::cw(
                omega,
                s.amplitude_v,
                match s.port {
                    PortConfig::Left => Port::Left,
                    PortConfig::Right => Port::Right,
                },
            ),
            SourceKindConfig::Pulse => SourceSpec::pulse(
                omega,
                s.amplitude_v,
                s.pulse_center_ns * 1e-9,
                s.pulse_width_ns * 1e-9,
            ),
        }
    }

    pub fn time_step(&self) -> TimeStep {
        self.dt_ps
            .map_or(TimeStep::Auto, |dt| TimeStep::Fixed(dt * 1e-12))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSweepConfig {
    pub phi_dc_rad: Vec<f64>,
    pub phi_rf_rad: Vec<f64>,
}

/// Inclusive grid start, start + step, ..., stop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn values(&self, scale: f64) -> Result<Vec<f64>, CliError> {
        if !(self.step > 0.0
            && self.stop >= self.start
            && self.start.is_finite()
            && self.stop.is_finite())
        {
            return Err(CliError::Validation(format!(
                "range needs step > 0 and stop >= start, got {:?}",
                self
            )));
        }
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        if n > 1_000_000 {
            return Err(CliError::Validation(
                "range has more than 1e6 points".into(),
            ));
        }
        Ok((0..n)
            .map(|k| (self.start + k as f64 * self.step) * scale)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceTransmon {
    pub ec_ghz: f64,
    pub ej_ghz: f64,
    pub ng: f64,
    pub n_charge_cut: usize,
    pub omega_r_ghz: f64,
    pub g_r_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmonConfig {
    pub n_qubits: usize,
    pub omega_m_ghz: f64,
    pub sigma_res_mhz: f64,
    pub ec_ghz: f64,
    pub dc_first_rad: f64,
    pub dc_last_rad: f64,
    pub dc_sweep_rad: Range,
    pub rf_values_rad: Vec<f64>,
    pub reference: ReferenceTransmon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwapPhaseConfig {
    Averaged,
    Instantaneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BusChoice {
    Reciprocal,
    Nonreciprocal,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BusConfig {
    pub c_purcell: f64,
    pub c_phi: f64,
    pub c0: f64,
    pub delta_bw_over_omega_m: f64,
    pub omega_res_over_omega_m: f64,
    pub gain_peak: f64,
    pub gain_center_over_omega_m: f64,
    pub gain_width_over_omega_m: f64,
    pub gain_floor: f64,
    pub z_base_slope: f64,
}

impl BusConfig {
    pub fn model(&self, kind: BusKind, omega_m: f64) -> BusIsolationModel {
        BusIsolationModel {
            kind,
            c_purcell: self.c_purcell,
            c_phi: self.c_phi,
            c0: self.c0,
            delta_bw: self.delta_bw_over_omega_m * omega_m,
            omega_res: self.omega_res_over_omega_m * omega_m,
            gain_profile: GainProfile {
                peak: self.gain_peak,
                center: self.gain_center_over_omega_m * omega_m,
                width: self.gain_width_over_omega_m * omega_m,
                floor: self.gain_floor,
            },
            z_base_slope: self.z_base_slope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetConfig {
    pub n_qubits: usize,
    pub omega_m_ghz: f64,
    pub t1_intrinsic_us: f64,
    pub t2_intrinsic_us: f64,
    pub g_mhz: f64,
    pub kappa_mhz: f64,
    pub t_gate_ns: f64,
    pub lambda_c_pitch: f64,
    pub swap_phase: SwapPhaseConfig,
    pub bus: BusChoice,
    pub decomposition_harmonic: u32,
    pub n_range: Vec<usize>,
    pub reciprocal: BusConfig,
    pub nonreciprocal: BusConfig,
}

impl BudgetConfig {
    pub fn omega_m(&self) -> f64 {
        TAU * self.omega_m_ghz * 1e9
    }

    pub fn array(&self) -> QubitArraySpec {
        let n = self.n_qubits;
        QubitArraySpec {
            n_qubits: n,
            omega_m: self.omega_m(),
            harmonic_indices: (1..=n as u32).collect(),
            positions: (1..=n).map(|i| i as f64).collect(),
            t1_intrinsic: self.t1_intrinsic_us * 1e-6,
            t2_intrinsic: self.t2_intrinsic_us * 1e-6,
            g_coupling: TAU * self.g_mhz * 1e6,
            kappa_bus: TAU * self.kappa_mhz * 1e6,
            t_gate: self.t_gate_ns * 1e-9,
            lambda_c: self.lambda_c_pitch,
            swap_phase: match self.swap_phase {
                SwapPhaseConfig::Averaged => SwapPhase::Averaged,
                SwapPhaseConfig::Instantaneous => SwapPhase::Instantaneous,
            },
        }
    }

    /// Selected bus models with their labels.
    pub fn models(&self) -> Vec<(&'static str, BusIsolationModel)> {
        let wm = self.omega_m();
        let r = ("reciprocal", self.reciprocal.model(BusKind::Reciprocal, wm));
        let nr = (
            "nonreciprocal",
            self.nonreciprocal.model(BusKind::Nonreciprocal, wm),
        );
        match self.bus {
            BusChoice::Reciprocal => vec![r],
            BusChoice::Nonreciprocal => vec![nr],
            BusChoice::Both => vec![r, nr],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonMarkovConfig {
    pub gamma_memory_mhz: f64,
    pub a_over_gamma_memory_sq: f64,
    pub gamma_markov_per_us: f64,
    /// Γ/γ of the memoryless comparison kernel.
    pub markov_ratio: f64,
    pub t_end_us: f64,
    pub n_steps: usize,
    pub initial_bloch: [f64; 3],
    pub smoothing_window: Option<usize>,
}

impl NonMarkovConfig {
    pub fn kernel(&self) -> KernelSpec {
        let g = TAU * self.gamma_memory_mhz * 1e6;
        KernelSpec::exponential(self.a_over_gamma_memory_sq * g * g, g)
    }

    pub fn gamma_markov(&self) -> f64 {
        self.gamma_markov_per_us * 1e6
    }

    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if self.n_steps == 0 || self.t_end_us.is_nan() || self.t_end_us <= 0.0 {
            return Err(CliError::Validation(
                "nonmarkov needs n_steps >= 1 and t_end_us > 0".into(),
            ));
        }
        let t_end = self.t_end_us * 1e-6;
        Ok((0..=self.n_steps)
            .map(|k| t_end * k as f64 / self.n_steps as f64)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKindConfig {
    OneOverF,
    Filtered,
    White,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub kind: NoiseKindConfig,
    pub amplitude_rad2_per_s2: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub n_components: usize,
    pub filter_center_hz: f64,
    pub filter_depth_db: f64,
    pub filter_q: f64,
}

impl NoiseConfig {
    pub fn model(&self) -> NoiseModel {
        NoiseModel {
            kind: match self.kind {
                NoiseKindConfig::OneOverF => NoiseKind::OneOverF,
                NoiseKindConfig::Filtered => NoiseKind::Filtered,
                NoiseKindConfig::White => NoiseKind::White,
            },
            amplitude: self.amplitude_rad2_per_s2,
            f_min: self.f_min_hz,
            f_max: self.f_max_hz,
            filter_center: self.filter_center_hz,
            filter_depth: self.filter_depth_db,
            filter_q: self.filter_q,
            n_components: self.n_components,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectroscopyConfig {
    pub noise: NoiseConfig,
    pub ramsey_tau_us: Range,
    pub echo_tau_us: Range,
    pub n_realizations: usize,
    pub fit_lo_ramsey: f64,
    pub fit_lo_echo: f64,
    pub fit_hi: f64,
}

/// Recursively overlays `patch` onto `base`.
pub fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Reads the value at a dotted path.
pub fn get_path<'a>(root: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(root, |v, key| v.get(key))
}

/// Writes `value` at a dotted path; every parent must already exist.
pub fn set_path(root: &mut Value, path: &str, value: Value) -> Result<(), CliError> {
    let mut cur = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| {
            CliError::Validation(format!("'{}' is not a table", keys[..i].join(".")))
        })?;
        if i + 1 == keys.len() {
            if !obj.contains_key(*key) {
                return Err(CliError::Validation(format!("unknown key '{path}'")));
            }
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        cur = obj
            .get_mut(*key)
            .ok_or_else(|| CliError::Validation(format!("unknown key '{path}'")))?;
    }
    unreachable!("split yields at least one key")
}

/// Parses a `--set` right-hand side: JSON if it parses, a string otherwise.
pub fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Numeric value for `leaf`, kept integral when the leaf is an integer.
pub fn numeric_like(leaf: &Value, x: f64) -> Result<Value, CliError> {
    if leaf.is_u64() || leaf.is_i64() {
        if x.fract() != 0.0 {
            return Err(CliError::Validation(format!("{x} is not an integer")));
        }
        return Ok(if x >= 0.0 {
            Value::from(x as u64)
        } else {
            Value::from(x as i64)
        });
    }
    if leaf.is_f64() || leaf.is_null() {
        return serde_json::Number::from_f64(x)
            .map(Value::Number)
            .ok_or_else(|| CliError::Validation(format!("{x} is not finite")));
    }
    Err(CliError::Validation(
        "sweep axis is not a numeric leaf".into(),
    ))
}

/// Defaults overlaid with the optional config file and `--set` pairs.
pub fn resolve_value(path: Option<&Path>, sets: &[String]) -> Result<Value, CliError> {
    let mut v: Value = serde_json::from_str(DEFAULTS).expect("shipped defaults parse");
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)
            .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        let user: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?;
        if !user.is_object() {
            return Err(CliError::Validation("config root must be an object".into()));
        }
        merge(&mut v, user);
    }
    for s in sets {
        let (k, raw) = s
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("--set expects key=value, got '{s}'")))?;
        set_path(&mut v, k.trim(), parse_value(raw.trim()))?;
    }
    Ok(v)
}

pub fn from_value(v: &Value) -> Result<Config, CliError> {
    Config::deserialize(v).map_err(|e| CliError::Validation(format!("config: {e}")))
}
