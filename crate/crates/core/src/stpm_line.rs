// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Classical wave propagation on a Josephson transmission line whose
//! inductance is modulated in space and time.
//!
//! The line is a lumped LC ladder. Branch flux lives on the `n_cells`
//! half nodes and node voltage on the `n_cells + 1` integer nodes; both are
//! advanced with a staggered leapfrog. Each cell carries the inductance
//!
//! ```text
//! L(z, t) = Φ0 / (2π I0) · sec(Φ̃dc + Φ̃rf · sin(κs z − ωs t + φ))
//! ```
//!
//! and the current is recovered as `flux / L`. Both ports are matched
//! resistive terminations; the driven port adds a Thevenin source.

use std::f64::consts::{FRAC_PI_2, PI};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Magnetic flux quantum h/2e in webers.
pub const PHI0: f64 = 2.067833848e-15;

/// Default distance kept between the secant argument and π/2.
pub const DEFAULT_MARGIN: f64 = 0.05;

/// Minimum analysis window, in periods of the fundamental.
pub const MIN_WINDOW_PERIODS: f64 = 8.0;

const DEGENERATE_ENERGY: f64 = 1e-40;

/// Modulation knobs defining the inductance law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxDrive {
    /// 2πΦdc/Φ0 in radians.
    pub phi_dc_tilde: f64,
    /// 2πΦrf/Φ0 in radians.
    pub phi_rf_tilde: f64,
    /// Spatial modulation wavenumber (rad/m).
    pub kappa_s: f64,
    /// Modulation angular frequency (rad/s).
    pub omega_s: f64,
    /// Modulation phase (rad).
    pub phase: f64,
    /// Excluded band below π/2 for the secant argument (rad).
    pub margin: f64,
}

impl FluxDrive {
    pub fn new(
        phi_dc_tilde: f64,
        phi_rf_tilde: f64,
        kappa_s: f64,
        omega_s: f64,
        phase: f64,
    ) -> Result<Self> {
        Self::with_margin(
            phi_dc_tilde,
            phi_rf_tilde,
            kappa_s,
            omega_s,
            phase,
            DEFAULT_MARGIN,
        )
    }

    pub fn with_margin(
        phi_dc_tilde: f64,
        phi_rf_tilde: f64,
        kappa_s: f64,
        omega_s: f64,
        phase: f64,
        margin: f64,
    ) -> Result<Self> {
        let drive = Self {
            phi_dc_tilde,
            phi_rf_tilde,
            kappa_s,
            omega_s,
            phase,
            margin,
        };
        drive.validate()?;
        Ok(drive)
    }

    /// Traveling modulation with three spatial periods along `geom` and ωs = `omega_s`.
    pub fn traveling(
        phi_dc_tilde: f64,
        phi_rf_tilde: f64,
        geom: &LineGeometry,
        omega_s: f64,
    ) -> Result<Self> {
        Self::new(
            phi_dc_tilde,
            phi_rf_tilde,
            6.0 * PI / geom.length(),
            omega_s,
            0.0,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [
            self.phi_dc_tilde,
            self.phi_rf_tilde,
            self.kappa_s,
            self.omega_s,
            self.phase,
            self.margin,
        ];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("flux drive has non-finite fields".into()));
        }
        if self.phi_rf_tilde < 0.0 {
            return Err(Error::Config(format!(
                "phi_rf_tilde must be >= 0, got {}",
                self.phi_rf_tilde
            )));
        }
        if !(self.margin > 0.0 && self.margin < FRAC_PI_2) {
            return Err(Error::Config(format!(
                "margin must lie in (0, pi/2), got {}",
                self.margin
            )));
        }
        let reach = self.phi_dc_tilde.abs() + self.phi_rf_tilde;
        if reach >= self.sec_limit() {
            return Err(Error::Domain(format!(
                "|phi_dc| + phi_rf = {reach:.4} reaches the secant guard {:.4}",
                self.sec_limit()
            )));
        }
        Ok(())
    }

    /// Largest admissible |argument| of the secant.
    pub fn sec_limit(&self) -> f64 {
        FRAC_PI_2 - self.margin
    }

    /// Secant argument Φ̃dc + Φ̃rf·sin(κs z − ωs t + φ).
    pub fn argument(&self, z: f64, t: f64) -> f64 {
        self.phi_dc_tilde
            + self.phi_rf_tilde * (self.kappa_s * z - self.omega_s * t + self.phase).sin()
    }

    /// Smallest |argument| reachable over all (z, t).
    fn min_abs_argument(&self) -> f64 {
        let lo = self.phi_dc_tilde - self.phi_rf_tilde;
        let hi = self.phi_dc_tilde + self.phi_rf_tilde;
        if lo <= 0.0 && hi >= 0.0 {
            0.0
        } else {
            lo.abs().min(hi.abs())
        }
    }
}

/// Discretisation and material constants of the line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineGeometry {
    pub n_cells: usize,
    /// Cell length (m).
    pub dz: f64,
    /// Capacitance per unit length (F/m).
    pub c_per_length: f64,
    /// Junction critical current (A).
    pub i0: f64,
    /// Flux quantum (Wb).
    pub phi0: f64,
}

impl Default for LineGeometry {
    /// 512 cells of 10 μm, 50 Ω unmodulated impedance, 64 cells per
    /// wavelength at 20 GHz.
    fn default() -> Self {
        Self {
            n_cells: 512,
            dz: 10e-6,
            c_per_length: 1.56e-9,
            i0: PHI0 / (2.0 * PI * 39e-12),
            phi0: PHI0,
        }
    }
}

impl LineGeometry {
    pub fn new(n_cells: usize, dz: f64, c_per_length: f64, i0: f64) -> Result<Self> {
        let g = Self {
            n_cells,
            dz,
            c_per_length,
            i0,
            phi0: PHI0,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 16 {
            return Err(Error::Config(format!(
                "n_cells must be >= 16, got {}",
                self.n_cells
            )));
        }
        for (name, v) in [
            ("dz", self.dz),
            ("c_per_length", self.c_per_length),
            ("i0", self.i0),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.n_cells as f64 * self.dz
    }

    pub fn c_cell(&self) -> f64 {
        self.c_per_length * self.dz
    }

    /// Unbiased junction inductance Φ0/(2π I0) per cell.
    pub fn l_junction(&self) -> f64 {
        self.phi0 / (2.0 * PI * self.i0)
    }

    /// Same physical line with half the cell length.
    ///
    /// The critical current doubles so the inductance per unit length is kept.
    pub fn refined(&self) -> Self {
        Self {
            n_cells: self.n_cells * 2,
            dz: self.dz / 2.0,
            i0: self.i0 * 2.0,
            ..*self
        }
    }
}

/// Cell inductance at position `z` and time `t`.
pub fn inductance_at(drive: &FluxDrive, geom: &LineGeometry, z: f64, t: f64) -> Result<f64> {
    drive.validate()?;
    if !(0.0..=geom.length()).contains(&z) {
        return Err(Error::Precondition(format!(
            "z = {z} outside [0, {}]",
            geom.length()
        )));
    }
    sec_inductance(geom.l_junction(), drive.argument(z, t), drive.sec_limit())
}

#[inline]
fn sec_inductance(l0: f64, arg: f64, limit: f64) -> Result<f64> {
    if arg.abs() >= limit {
        return Err(Error::Domain(format!(
            "secant argument {arg:.6} inside the excluded margin"
        )));
    }
    Ok(l0 / arg.cos())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceKind {
    ContinuousWave,
    GaussianPulse { t_center: f64, t_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Port {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub kind: SourceKind,
    /// Carrier angular frequency (rad/s).
    pub omega: f64,
    /// Open-circuit amplitude (V).
    pub amplitude: f64,
    pub port: Port,
}

impl SourceSpec {
    pub fn cw(omega: f64, amplitude: f64, port: Port) -> Self {
        Self {
            kind: SourceKind::ContinuousWave,
            omega,
            amplitude,
            port,
        }
    }

    pub fn pulse(omega: f64, amplitude: f64, t_center: f64, t_width: f64) -> Self {
        Self {
            kind: SourceKind::GaussianPulse { t_center, t_width },
            omega,
            amplitude,
            port: Port::Left,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::Config(format!(
                "source omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::Config(format!(
                "source amplitude must be >= 0, got {}",
                self.amplitude
            )));
        }
        if let SourceKind::GaussianPulse { t_center, t_width } = self.kind {
            if !(t_width.is_finite() && t_width > 0.0 && t_center.is_finite()) {
                return Err(Error::Config(
                    "pulse needs finite t_center and t_width > 0".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub cfl_safety: f64,
    /// Raised-cosine turn-on of the CW source, in carrier periods.
    pub ramp_periods: f64,
    /// Blow-up ceiling as a multiple of the source amplitude.
    pub blowup_factor: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            cfl_safety: 0.9,
            ramp_periods: 2.0,
            blowup_factor: 1e6,
        }
    }
}

/// Field snapshot. `current` holds the branch currents of the last half step.
#[derive(Debug, Clone, PartialEq)]
pub struct LineState {
    pub t: f64,
    pub v: Vec<f64>,
    pub flux: Vec<f64>,
    pub current: Vec<f64>,
    pub step_index: u64,
}

impl LineState {
    fn zeros(n_cells: usize) -> Self {
        Self {
            t: 0.0,
            v: vec![0.0; n_cells + 1],
            flux: vec![0.0; n_cells],
            current: vec![0.0; n_cells],
            step_index: 0,
        }
    }

    /// Current interpolated onto the integer nodes.
    pub fn node_current(&self) -> Vec<f64> {
        let n = self.current.len();
        let mut out = Vec::with_capacity(n + 1);
        out.push(self.current[0]);
        for k in 1..n {
            out.push(0.5 * (self.current[k - 1] + self.current[k]));
        }
        out.push(self.current[n - 1]);
        out
    }
}

/// Per-harmonic powers at a probe.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub harmonic_index: Vec<u32>,
    pub freq_hz: Vec<f64>,
    pub power_dbc: Vec<f64>,
    pub absolute_power: Vec<f64>,
    pub probe_position: f64,
}

impl SpectrumReport {
    /// Sum of n ≥ 2 power relative to the fundamental.
    pub fn harmonic_power_ratio(&self) -> f64 {
        self.absolute_power[1..].iter().sum::<f64>() / self.absolute_power[0]
    }

    pub fn count_above(&self, dbc: f64) -> usize {
        self.power_dbc[1..].iter().filter(|&&p| p > dbc).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketMetrics {
    pub t: f64,
    pub centroid: f64,
    pub rms_width: f64,
    /// Magnitude-weighted mean spatial wavenumber (rad/m).
    pub spectral_centroid: f64,
    pub peak_velocity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolationEntry {
    pub harmonic: u32,
    pub p_forward: f64,
    pub p_backward: f64,
    /// 10·log10(P_fwd / P_bwd).
    pub isolation_db: f64,
}

pub struct Simulator {
    geom: LineGeometry,
    drive: FluxDrive,
    source: SourceSpec,
    opts: SimOptions,
    dt: f64,
    z_port: f64,
    l0: f64,
    kz: Vec<f64>,
    state: LineState,
    source_on: bool,
}

/// Builds a simulator with default options.
pub fn build_line(
    geom: LineGeometry,
    drive: FluxDrive,
    source: SourceSpec,
    dt: TimeStep,
) -> Result<Simulator> {
    Simulator::new(geom, drive, source, dt, SimOptions::default())
}

impl Simulator {
    pub fn new(
        geom: LineGeometry,
        drive: FluxDrive,
        source: SourceSpec,
        dt: TimeStep,
        opts: SimOptions,
    ) -> Result<Self> {
        geom.validate()?;
        drive.validate()?;
        source.validate()?;
        if !(opts.cfl_safety > 0.0 && opts.cfl_safety <= 1.0) {
            return Err(Error::Config(format!(
                "cfl_safety must lie in (0, 1], got {}",
                opts.cfl_safety
            )));
        }
        if !(opts.blowup_factor > 0.0 && opts.ramp_periods >= 0.0) {
            return Err(Error::Config(
                "blowup_factor must be > 0 and ramp_periods >= 0".into(),
            ));
        }
        let l0 = geom.l_junction();
        let c = geom.c_cell();
        let l_min = l0 / drive.min_abs_argument().cos();
        let bound = (l_min * c).sqrt();
        let dt = match dt {
            TimeStep::Auto => opts.cfl_safety * bound,
            TimeStep::Fixed(dt) => {
                if !(dt.is_finite() && dt > 0.0) {
                    return Err(Error::Config(format!("dt must be positive, got {dt}")));
                }
                if dt > bound {
                    return Err(Error::Config(format!(
                        "dt = {dt:e} exceeds the CFL bound {bound:e}"
                    )));
                }
                dt
            }
        };
        let z_port = (l0 / drive.phi_dc_tilde.cos() / c).sqrt();
        let kz = (0..geom.n_cells)
            .map(|k| drive.kappa_s * (k as f64 + 0.5) * geom.dz + drive.phase)
            .collect();
        Ok(Self {
            geom,
            drive,
            source,
            opts,
            dt,
            z_port,
            l0,
            kz,
            state: LineState::zeros(geom.n_cells),
            source_on: true,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn geometry(&self) -> &LineGeometry {
        &self.geom
    }

    pub fn drive(&self) -> &FluxDrive {
        &self.drive
    }

    pub fn source(&self) -> &SourceSpec {
        &self.source
    }

    pub fn state(&self) -> &LineState {
        &self.state
    }

    /// Port impedance sqrt(L0·sec(Φ̃dc)/C).
    pub fn port_impedance(&self) -> f64 {
        self.z_port
    }

    /// Disconnects the source; the ports stay terminated.
    pub fn switch_off_source(&mut self) {
        self.source_on = false;
    }

    /// Replaces the fields, for runs started from a prescribed state.
    pub fn set_fields(&mut self, v: Vec<f64>, flux: Vec<f64>) -> Result<()> {
        let n = self.geom.n_cells;
        if v.len() != n + 1 || flux.len() != n {
            return Err(Error::Precondition(
                "field lengths do not match the geometry".into(),
            ));
        }
        let t_half = self.state.t - 0.5 * self.dt;
        let mut current = vec![0.0; n];
        for k in 0..n {
            current[k] = flux[k] / self.cell_inductance(k, t_half)?;
        }
        self.state.v = v;
        self.state.flux = flux;
        self.state.current = current;
        Ok(())
    }

    #[inline]
    fn cell_inductance(&self, k: usize, t: f64) -> Result<f64> {
        let d = &self.drive;
        let arg = d.phi_dc_tilde + d.phi_rf_tilde * (self.kz[k] - d.omega_s * t).sin();
        sec_inductance(self.l0, arg, d.sec_limit())
    }

    fn source_value(&self, t: f64) -> f64 {
        if !self.source_on {
            return 0.0;
        }
        let s = &self.source;
        match s.kind {
            SourceKind::ContinuousWave => {
                let ramp_t = self.opts.ramp_periods * s.period();
                let r = if t >= ramp_t {
                    1.0
                } else {
                    0.5 * (1.0 - (PI * t / ramp_t).cos())
                };
                s.amplitude * r * (s.omega * t).sin()
            }
            SourceKind::GaussianPulse { t_center, t_width } => {
                let x = (t - t_center) / t_width;
                s.amplitude * (-0.5 * x * x).exp() * (s.omega * (t - t_center)).sin()
            }
        }
    }

    /// Stored energy Σ C v²/2 + Σ L I²/2 with half capacitors at the ports.
    pub fn energy(&self) -> f64 {
        let c = self.geom.c_cell();
        let v = &self.state.v;
        let n = v.len() - 1;
        let mut e = 0.25 * c * (v[0] * v[0] + v[n] * v[n]);
        e += v[1..n].iter().map(|x| 0.5 * c * x * x).sum::<f64>();
        e += self
            .state
            .flux
            .iter()
            .zip(&self.state.current)
            .map(|(f, i)| 0.5 * f * i)
            .sum::<f64>();
        e
    }

    /// Advances the fields by one time step.
    pub fn step(&mut self) -> Result<&LineState> {
        let n = self.geom.n_cells;
        let dt = self.dt;
        let c = self.geom.c_cell();
        let t_half = self.state.t + 0.5 * dt;
        {
            let st = &mut self.state;
            for k in 0..n {
                st.flux[k] += dt * (st.v[k] - st.v[k + 1]);
            }
        }
        for k in 0..n {
            let l = self.cell_inductance(k, t_half)?;
            self.state.current[k] = self.state.flux[k] / l;
        }
        let vs = self.source_value(t_half);
        let (vl, vr) = match self.source.port {
            Port::Left => (vs, 0.0),
            Port::Right => (0.0, vs),
        };
        let z = self.z_port;
        let st = &mut self.state;
        let k_c = dt / c;
        for k in 1..n {
            st.v[k] += k_c * (st.current[k - 1] - st.current[k]);
        }
        // Half-cell capacitor at each port, trapezoidal in the resistor.
        let a = c / (2.0 * dt);
        let b = 1.0 / (2.0 * z);
        st.v[0] = (st.v[0] * (a - b) + vl / z - st.current[0]) / (a + b);
        st.v[n] = (st.v[n] * (a - b) + vr / z + st.current[n - 1]) / (a + b);
        st.step_index += 1;
        st.t = st.step_index as f64 * dt;

        let ceiling = self.opts.blowup_factor * self.source.amplitude;
        let v_max = st.v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let i_max = st.current.iter().fold(0.0f64, |m, x| m.max(x.abs())) * z;
        if !(v_max.is_finite() && i_max.is_finite()) {
            return Err(Error::Blowup(format!(
                "non-finite field at t = {:e} s",
                st.t
            )));
        }
        if v_max > ceiling || i_max > ceiling {
            return Err(Error::Blowup(format!(
                "field magnitude {:e} exceeds ceiling {ceiling:e} at t = {:e} s",
                v_max.max(i_max),
                st.t
            )));
        }
        Ok(&self.state)
    }

    fn advance_to(&mut self, t: f64) -> Result<()> {
        while self.state.t + 0.5 * self.dt < t {
            self.step()?;
        }
        Ok(())
    }

    /// Runs to `t_end`, returning the states nearest each snapshot time.
    pub fn run_until(&mut self, t_end: f64, snapshot_times: &[f64]) -> Result<Vec<LineState>> {
        let t_now = self.state.t;
        if !(t_end > t_now) {
            return Err(Error::Precondition(format!(
                "t_end = {t_end:e} is not after t = {t_now:e}"
            )));
        }
        if snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Precondition("snapshot times must be sorted".into()));
        }
        if snapshot_times.iter().any(|&s| !(s > t_now && s <= t_end)) {
            return Err(Error::Precondition(
                "snapshot times must lie in (t_now, t_end]".into(),
            ));
        }
        let mut out = Vec::with_capacity(snapshot_times.len());
        for &ts in snapshot_times {
            self.advance_to(ts)?;
            out.push(self.state.clone());
        }
        self.advance_to(t_end)?;
        Ok(out)
    }

    fn probe_node(&self, probe: f64) -> Result<usize> {
        if !(probe.is_finite() && (0.0..=self.geom.length()).contains(&probe)) {
            return Err(Error::Precondition(format!(
                "probe {probe} outside the line"
            )));
        }
        Ok((probe / self.geom.dz).round() as usize)
    }

    fn check_window(&self, t0: f64, t1: f64) -> Result<()> {
        let need = MIN_WINDOW_PERIODS * self.source.period();
        if t1 - t0 < need * (1.0 - 1e-9) {
            return Err(Error::Precondition(format!(
                "window {:e} s shorter than {MIN_WINDOW_PERIODS} periods ({need:e} s)",
                t1 - t0
            )));
        }
        if t0 < self.state.t {
            return Err(Error::Precondition(
                "window starts before the current time".into(),
            ));
        }
        Ok(())
    }

    /// Runs through `window` recording node current at `node` (or a port voltage).
    fn record(
        &mut self,
        window: (f64, f64),
        mut sample: impl FnMut(&LineState) -> f64,
    ) -> Result<Vec<f64>> {
        let (t0, t1) = window;
        let mut xs = Vec::new();
        while self.state.t + 0.5 * self.dt < t1 {
            self.step()?;
            if self.state.t >= t0 {
                xs.push(sample(&self.state));
            }
        }
        Ok(xs)
    }

    /// Harmonic content of the current at `probe` over `window`.
    pub fn harmonic_spectrum(
        &mut self,
        probe: f64,
        window: (f64, f64),
        n_max: u32,
    ) -> Result<SpectrumReport> {
        let node = self.probe_node(probe)?;
        self.check_window(window.0, window.1)?;
        if n_max < 1 {
            return Err(Error::Precondition("n_max must be >= 1".into()));
        }
        let xs = self.record(window, |s| node_current_at(s, node))?;
        let f0 = self.source.omega / (2.0 * PI);
        let powers = harmonic_powers(&xs, self.dt, f0, n_max);
        spectrum_report(powers, f0, probe)
    }

    /// Sliding-window harmonic-to-fundamental ratio at `probe` from now to `t_end`.
    ///
    /// Each entry is `(window end time, Σ_{n≥2} P_n / P_1)`.
    pub fn harmonic_trace(
        &mut self,
        probe: f64,
        t_end: f64,
        window_periods: f64,
        hop: usize,
        n_max: u32,
    ) -> Result<Vec<(f64, f64)>> {
        let node = self.probe_node(probe)?;
        if window_periods < MIN_WINDOW_PERIODS || hop == 0 || n_max < 2 {
            return Err(Error::Precondition(
                "need >= 8 window periods, hop >= 1, n_max >= 2".into(),
            ));
        }
        let f0 = self.source.omega / (2.0 * PI);
        let nw = (window_periods * self.source.period() / self.dt).round() as usize;
        let mut xs = Vec::new();
        let mut ts = Vec::new();
        while self.state.t + 0.5 * self.dt < t_end {
            self.step()?;
            xs.push(node_current_at(&self.state, node));
            ts.push(self.state.t);
        }
        let mut out = Vec::new();
        let mut end = nw;
        while end <= xs.len() {
            let p = harmonic_powers(&xs[end - nw..end], self.dt, f0, n_max);
            let ratio = if p[0] > 0.0 {
                p[1..].iter().sum::<f64>() / p[0]
            } else {
                0.0
            };
            out.push((ts[end - 1], ratio));
            end += hop;
        }
        Ok(out)
    }
}

fn node_current_at(s: &LineState, node: usize) -> f64 {
    let n = s.current.len();
    if node == 0 {
        s.current[0]
    } else if node == n {
        s.current[n - 1]
    } else {
        0.5 * (s.current[node - 1] + s.current[node])
    }
}

/// Hann-tapered periodogram power at the bins nearest n·f0, n = 1..=n_max.
///
/// Normalised by (Σw)² so a sinusoid of amplitude a reads a²/4 regardless
/// of record length.
pub fn harmonic_powers(xs: &[f64], dt: f64, f0: f64, n_max: u32) -> Vec<f64> {
    let n = xs.len();
    if n < 2 {
        return vec![0.0; n_max as usize];
    }
    let w: Vec<f64> = (0..n)
        .map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / (n - 1) as f64).cos())
        .collect();
    let wsum: f64 = w.iter().sum();
    let mut buf: Vec<Complex64> = xs
        .iter()
        .zip(&w)
        .map(|(x, w)| Complex64::new(x * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dt);
    (1..=n_max)
        .map(|h| {
            let bin = ((h as f64 * f0 / df).round() as usize).min(n / 2);
            buf[bin].norm_sqr() / (wsum * wsum)
        })
        .collect()
}

fn spectrum_report(powers: Vec<f64>, f0: f64, probe: f64) -> Result<SpectrumReport> {
    let p1 = powers[0];
    if !(p1 > 0.0) {
        return Err(Error::Undefined("fundamental power is zero".into()));
    }
    let n = powers.len() as u32;
    Ok(SpectrumReport {
        harmonic_index: (1..=n).collect(),
        freq_hz: (1..=n).map(|h| h as f64 * f0).collect(),
        power_dbc: powers.iter().map(|p| 10.0 * (p / p1).log10()).collect(),
        absolute_power: powers,
        probe_position: probe,
    })
}

/// Forward/backward transmission contrast per harmonic.
///
/// Runs the line driven from the left and, separately, from the right, and
/// compares band power of the far-port voltage over `window`.
pub fn isolation_report(
    geom: &LineGeometry,
    drive: &FluxDrive,
    source_omega: f64,
    amplitude: f64,
    harmonics: &[u32],
    window: (f64, f64),
) -> Result<Vec<IsolationEntry>> {
    if !(amplitude > 0.0) {
        return Err(Error::Undefined(
            "zero source amplitude carries no power".into(),
        ));
    }
    if harmonics.contains(&0) {
        return Err(Error::Precondition("harmonic indices start at 1".into()));
    }
    let n_max = harmonics.iter().copied().max().unwrap_or(1);
    let run = |port: Port| -> Result<Vec<f64>> {
        let src = SourceSpec::cw(source_omega, amplitude, port);
        let mut sim = build_line(*geom, *drive, src, TimeStep::Auto)?;
        sim.check_window(window.0, window.1)?;
        let far = geom.n_cells;
        let xs = match port {
            Port::Left => sim.record(window, |s| s.v[far])?,
            Port::Right => sim.record(window, |s| s.v[0])?,
        };
        Ok(harmonic_powers(
            &xs,
            sim.dt,
            source_omega / (2.0 * PI),
            n_max,
        ))
    };
    let (fwd, bwd) = std::thread::scope(|s| {
        let h = s.spawn(|| run(Port::Right));
        let f = run(Port::Left);
        (f, h.join().expect("backward run panicked"))
    });
    let (fwd, bwd) = (fwd?, bwd?);
    harmonics
        .iter()
        .map(|&h| {
            let (pf, pb) = (fwd[h as usize - 1], bwd[h as usize - 1]);
            if !(pf > 0.0 && pb > 0.0) {
                return Err(Error::Undefined(format!("no power at harmonic {h}")));
            }
            Ok(IsolationEntry {
                harmonic: h,
                p_forward: pf,
                p_backward: pb,
                isolation_db: 10.0 * (pf / pb).log10(),
            })
        })
        .collect()
}

/// Centroid, width, spatial spectral centroid and velocity of a pulse.
pub fn wavepacket_metrics(
    states: &[LineState],
    geom: &LineGeometry,
) -> Result<Vec<WavepacketMetrics>> {
    let mut out: Vec<WavepacketMetrics> = Vec::with_capacity(states.len());
    let mut planner = FftPlanner::new();
    for st in states {
        if st.v.len() != geom.n_cells + 1 || st.current.len() != geom.n_cells {
            return Err(Error::Precondition(
                "state does not match the geometry".into(),
            ));
        }
        let i = st.node_current();
        let u: Vec<f64> = i.iter().map(|x| x * x).collect();
        let total: f64 = u.iter().sum();
        if !(total > DEGENERATE_ENERGY) {
            return Err(Error::Undefined(format!(
                "no pulse energy on the line at t = {:e} s",
                st.t
            )));
        }
        let z = |k: usize| k as f64 * geom.dz;
        let centroid = u.iter().enumerate().map(|(k, u)| z(k) * u).sum::<f64>() / total;
        let var = u
            .iter()
            .enumerate()
            .map(|(k, u)| (z(k) - centroid).powi(2) * u)
            .sum::<f64>()
            / total;

        let m = i.len();
        let mut buf: Vec<Complex64> = i.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        planner.plan_fft_forward(m).process(&mut buf);
        let dk = 2.0 * PI / (m as f64 * geom.dz);
        let (mut num, mut den) = (0.0, 0.0);
        for (b, x) in buf.iter().enumerate().take(m / 2 + 1) {
            let a = x.norm();
            num += b as f64 * dk * a;
            den += a;
        }

        let peak_velocity = out
            .last()
            .map(|prev| (centroid - prev.centroid) / (st.t - prev.t));
        out.push(WavepacketMetrics {
            t: st.t,
            centroid,
            rms_width: var.sqrt(),
            spectral_centroid: num / den,
            peak_velocity,
        });
    }
    Ok(out)
}
