// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario bodies. Each returns its artifacts in memory; nothing here
//! touches the filesystem.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde_json::{json, Value};
use stmbus_core::error_budget::{array_budget, budget_decomposition, scalability_sweep};
use stmbus_core::nonmarkov::{
    evolve_kernel, evolve_markovian, fit_decay, gamma_eff, gamma_eff_segments, hahn_echo, ramsey,
    select_for_fit,
};
use stmbus_core::stpm_line::{build_line, isolation_report, wavepacket_metrics};
use stmbus_core::transmon::{
    addressing_map, chi_dispersive, design_comb, diagonalize, dispersive_ratio,
};
use stmbus_core::{
    DecayFit, DecayModel, KernelSpec, ReadoutSpec, SpectrumReport, TransmonSpec, TwoLevelState,
};

use crate::config::{Config, LineConfig, Scenario};
use crate::error::CliError;
use crate::table::Table;

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Table(Table),
    Json(Value),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    /// File name without extension.
    pub stem: String,
    pub payload: Payload,
}

impl Artifact {
    fn table(stem: impl Into<String>, t: Table) -> Self {
        Self {
            stem: stem.into(),
            payload: Payload::Table(t),
        }
    }

    fn json(stem: impl Into<String>, v: Value) -> Self {
        Self {
            stem: stem.into(),
            payload: Payload::Json(v),
        }
    }
}

/// A grid point that failed while the rest of the scenario went ahead.
#[derive(Debug, Clone, PartialEq)]
pub struct PointFailure {
    pub label: String,
    pub error: CliError,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScenarioOutput {
    pub artifacts: Vec<Artifact>,
    pub failures: Vec<PointFailure>,
}

impl From<Vec<Artifact>> for ScenarioOutput {
    fn from(artifacts: Vec<Artifact>) -> Self {
        Self {
            artifacts,
            failures: Vec::new(),
        }
    }
}

pub fn run(scenario: Scenario, c: &Config) -> Result<ScenarioOutput, CliError> {
    match scenario {
        Scenario::LineSim => line_sim(c).map(Into::into),
        Scenario::FluxSweep => flux_sweep(c),
        Scenario::Addressing => addressing(c).map(Into::into),
        Scenario::ErrorBudget => error_budget(c).map(Into::into),
        Scenario::Scalability => scalability(c).map(Into::into),
        Scenario::Nonmarkov => nonmarkov(c).map(Into::into),
        Scenario::Spectroscopy => spectroscopy(c).map(Into::into),
    }
}

fn spectrum_table(s: &SpectrumReport) -> Table {
    let mut t = Table::new(&["n", "freq_hz", "power_dbc", "power_abs"]);
    for k in 0..s.harmonic_index.len() {
        t.push(vec![
            s.harmonic_index[k].into(),
            s.freq_hz[k].into(),
            s.power_dbc[k].into(),
            s.absolute_power[k].into(),
        ]);
    }
    t
}

fn line_spectrum(l: &LineConfig) -> Result<SpectrumReport, CliError> {
    let geom = l.geometry()?;
    let drive = l.drive(&geom)?;
    let mut sim = build_line(geom, drive, l.source_spec(), l.time_step())?;
    let window = (l.window_ns[0] * 1e-9, l.window_ns[1] * 1e-9);
    Ok(sim.harmonic_spectrum(l.probe_fraction * geom.length(), window, l.n_harmonics)?)
}

fn line_sim(c: &Config) -> Result<Vec<Artifact>, CliError> {
    let l = &c.line;
    let geom = l.geometry()?;
    let drive = l.drive(&geom)?;
    let snaps: Vec<f64> = l.snapshots_ns.iter().map(|t| t * 1e-9).collect();
    let (states, spectrum) = rayon::join(
        || -> Result<_, CliError> {
            let mut sim = build_line(geom, drive, l.source_spec(), l.time_step())?;
            Ok(sim.run_until(l.t_end_ns * 1e-9, &snaps)?)
        },
        || line_spectrum(l),
    );
    let (states, spectrum) = (states?, spectrum?);

    let mut out = Vec::new();
    let i_nodes: Vec<Vec<f64>> = states.iter().map(|s| s.node_current()).collect();
    for ((st, ns), i) in states.iter().zip(&l.snapshots_ns).zip(&i_nodes) {
        let mut t = Table::new(&["z_m", "v_volts", "i_amps"]);
        for (k, (v, i)) in st.v.iter().zip(i).enumerate() {
            t.push(vec![(k as f64 * geom.dz).into(), (*v).into(), (*i).into()]);
        }
        out.push(Artifact::table(format!("field_t{ns:.3}"), t));
    }
    out.push(Artifact::table("spectrum", spectrum_table(&spectrum)));
    if !states.is_empty() {
        let mut t = Table::new(&[
            "t_s",
            "centroid_m",
            "rms_width_m",
            "spectral_centroid_radpm",
            "peak_velocity_mps",
        ]);
        for m in wavepacket_metrics(&states, &geom)? {
            t.push(vec![
                m.t.into(),
                m.centroid.into(),
                m.rms_width.into(),
                m.spectral_centroid.into(),
                m.peak_velocity.into(),
            ]);
        }
        out.push(Artifact::table("metrics", t));
    }
    if l.isolation {
        let src = l.source_spec();
        let harmonics: Vec<u32> = (1..=l.n_harmonics).collect();
        let window = (
            l.isolation_window_ns[0] * 1e-9,
            l.isolation_window_ns[1] * 1e-9,
        );
        let rows = isolation_report(&geom, &drive, src.omega, src.amplitude, &harmonics, window)?;
        let mut t = Table::new(&["n", "freq_hz", "p_forward", "p_backward", "isolation_db"]);
        for r in rows {
            t.push(vec![
                r.harmonic.into(),
                (r.harmonic as f64 * src.omega / TAU).into(),
                r.p_forward.into(),
                r.p_backward.into(),
                r.isolation_db.into(),
            ]);
        }
        out.push(Artifact::table("isolation", t));
    }
    Ok(out)
}

fn flux_sweep(c: &Config) -> Result<ScenarioOutput, CliError> {
    let grid: Vec<(f64, f64)> = c
        .flux_sweep
        .phi_dc_rad
        .iter()
        .flat_map(|&dc| c.flux_sweep.phi_rf_rad.iter().map(move |&rf| (dc, rf)))
        .collect();
    // Configuration errors outside the swept knobs fail the whole run.
    c.line.geometry()?;
    c.line.source_spec().validate()?;
    let results: Vec<_> = grid
        .par_iter()
        .map(|&(dc, rf)| {
            let l = LineConfig {
                phi_dc_rad: dc,
                phi_rf_rad: rf,
                ..c.line.clone()
            };
            line_spectrum(&l)
        })
        .collect();
    let mut spectra = Table::new(&["phi_dc", "phi_rf", "n", "freq_hz", "power_dbc", "power_abs"]);
    let mut ratios = Table::new(&["phi_dc", "phi_rf", "harmonic_ratio"]);
    let mut failures = Vec::new();
    for (&(dc, rf), r) in grid.iter().zip(results) {
        match r {
            Ok(s) => {
                for row in spectrum_table(&s).rows {
                    let mut full = vec![dc.into(), rf.into()];
                    full.extend(row);
                    spectra.push(full);
                }
                ratios.push(vec![dc.into(), rf.into(), s.harmonic_power_ratio().into()]);
            }
            Err(error) => failures.push(PointFailure {
                label: format!("phi_dc={dc},phi_rf={rf}"),
                error,
            }),
        }
    }
    Ok(ScenarioOutput {
        artifacts: vec![
            Artifact::table("flux_sweep", spectra),
            Artifact::table("harmonic_power", ratios),
        ],
        failures,
    })
}

fn addressing(c: &Config) -> Result<Vec<Artifact>, CliError> {
    let tc = &c.transmon;
    let spec = design_comb(
        tc.n_qubits,
        TAU * tc.omega_m_ghz * 1e9,
        TAU * tc.sigma_res_mhz * 1e6,
        tc.ec_ghz * 1e9,
        tc.dc_first_rad,
        tc.dc_last_rad,
    )?;
    let dc = tc.dc_sweep_rad.values(1.0)?;
    let mut t = Table::new(&["phi_dc", "phi_rf", "qubit_index", "score"]);
    for p in addressing_map(&spec, &dc, &tc.rf_values_rad)? {
        t.push(vec![
            p.phi_dc.into(),
            p.phi_rf.into(),
            p.qubit_index.into(),
            p.score.into(),
        ]);
    }

    let r = &tc.reference;
    let ej = r.ej_ghz * 1e9;
    let ref_spec = TransmonSpec {
        ec: r.ec_ghz * 1e9,
        ej_max: ej / 2.0,
        ng: r.ng,
        n_charge_cut: r.n_charge_cut,
    };
    let levels = diagonalize(&ref_spec, ej)?;
    let mut lt = Table::new(&["level", "freq_hz"]);
    for (k, f) in levels.levels.iter().enumerate() {
        lt.push(vec![k.into(), (*f).into()]);
    }
    let readout = ReadoutSpec {
        omega_r: r.omega_r_ghz * 1e9,
        g_r: r.g_r_mhz * 1e6,
    };
    let chi = chi_dispersive(&ref_spec, ej, &readout)?;
    let summary = json!({
        "omega_q_hz": levels.omega_q,
        "anharmonicity_hz": levels.anharmonicity,
        "chi_hz": chi,
        "dispersive_ratio": dispersive_ratio(levels.omega_q, &readout),
        "n_charge_cut": levels.n_charge_cut,
    });
    Ok(vec![
        Artifact::table("addressing", t),
        Artifact::table("levels", lt),
        Artifact::json("dispersive", summary),
    ])
}

fn error_budget(c: &Config) -> Result<Vec<Artifact>, CliError> {
    let arr = c.budget.array();
    let h = c.budget.decomposition_harmonic;
    let idx = arr
        .index_of_harmonic(h)
        .ok_or_else(|| CliError::Validation(format!("no qubit on tooth {h}")))?;
    let mut out = Vec::new();
    for (label, model) in c.budget.models() {
        let mut t = Table::new(&[
            "qubit",
            "omega_over_omega_m",
            "t1_s",
            "t2_s",
            "e_relax",
            "e_dephase",
            "e_crosstalk",
            "e_total",
        ]);
        for b in array_budget(&arr, &model)? {
            t.push(vec![
                (b.qubit + 1).into(),
                b.omega_over_omega_m.into(),
                b.t1_eff.into(),
                b.t2_eff.into(),
                b.e_relax.into(),
                b.e_dephase.into(),
                b.e_crosstalk.into(),
                b.e_total.into(),
            ]);
        }
        out.push(Artifact::table(format!("budget_{label}"), t));
        let d = budget_decomposition(&arr, &model, idx)?;
        out.push(Artifact::json(
            format!("decomposition_{label}"),
            json!({
                "harmonic": h,
                "e_relax": d.budget.e_relax,
                "e_dephase": d.budget.e_dephase,
                "e_crosstalk": d.budget.e_crosstalk,
                "e_total": d.budget.e_total,
                "purcell": d.purcell,
                "relax_fraction": d.relax_fraction,
                "dephase_fraction": d.dephase_fraction,
                "crosstalk_fraction": d.crosstalk_fraction,
                "dominant": d.dominant(),
            }),
        ));
    }
    Ok(out)
}

fn scalability(c: &Config) -> Result<Vec<Artifact>, CliError> {
    let arr = c.budget.array();
    let mut t = Table::new(&["n", "worst_case_error", "model"]);
    for (label, model) in c.budget.models() {
        for p in scalability_sweep(&arr, &model, &c.budget.n_range)? {
            t.push(vec![p.n.into(), p.worst_case_error.into(), label.into()]);
        }
    }
    Ok(vec![Artifact::table("scalability", t)])
}

fn population_table(t: &[f64], p: &[f64]) -> Table {
    let mut out = Table::new(&["t_s", "rho00"]);
    for (t, p) in t.iter().zip(p) {
        out.push(vec![(*t).into(), (*p).into()]);
    }
    out
}

fn nonmarkov(c: &Config) -> Result<Vec<Artifact>, CliError> {
    let nm = &c.nonmarkov;
    let grid = nm.grid()?;
    let start = TwoLevelState::from_bloch(nm.initial_bloch);
    start.validate()?;
    let gamma = nm.gamma_markov();
    let kernel = evolve_kernel(&start, &nm.kernel(), &grid)?;
    let markov = evolve_markovian(&start, gamma, &grid)?;
    let limit = evolve_kernel(
        &start,
        &KernelSpec::markov_equivalent(gamma, nm.markov_ratio * gamma),
        &grid,
    )?;

    let segments = gamma_eff_segments(&grid, &kernel.rho00, nm.smoothing_window)?;
    let mut ge = Table::new(&["t_s", "gamma_eff_hz"]);
    for s in &segments {
        for (t, g) in s.t.iter().zip(&s.gamma_eff) {
            ge.push(vec![(*t).into(), (*g).into()]);
        }
    }
    let backflow = segments.iter().find_map(|s| s.negative_interval());
    let mut gm = Table::new(&["t_s", "gamma_eff_hz"]);
    if markov.rho00.iter().all(|&p| p > 0.0) {
        for (t, g) in grid
            .iter()
            .zip(gamma_eff(&grid, &markov.rho00, nm.smoothing_window)?)
        {
            gm.push(vec![(*t).into(), g.into()]);
        }
    }
    let limit_error = limit
        .rho00
        .iter()
        .zip(&markov.rho00)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let summary = json!({
        "kernel_min_eigenvalue": kernel.min_eigenvalue(),
        "kernel_physical": kernel.is_physical(),
        "backflow_interval_s": backflow.map(|(a, b)| vec![a, b]),
        "markov_limit_max_abs_error": limit_error,
    });
    Ok(vec![
        Artifact::table("rho00_kernel", population_table(&grid, &kernel.rho00)),
        Artifact::table("rho00_markov", population_table(&grid, &markov.rho00)),
        Artifact::table("rho00_markov_limit", population_table(&grid, &limit.rho00)),
        Artifact::table("gamma_eff_kernel", ge),
        Artifact::table("gamma_eff_markov", gm),
        Artifact::json("summary", summary),
    ])
}

fn fit_json(f: &DecayFit) -> Value {
    json!({
        "model": f.model.label(),
        "timescale_s": f.timescale,
        "beta": f.beta,
        "residual": f.residual,
    })
}

fn spectroscopy(c: &Config) -> Result<Vec<Artifact>, CliError> {
    let s = &c.spectroscopy;
    let model = s.noise.model();
    model.validate()?;
    let tr = s.ramsey_tau_us.values(1e-6)?;
    let te = s.echo_tau_us.values(1e-6)?;
    let (r, e) = rayon::join(
        || ramsey(&model, &tr, s.n_realizations, c.seed),
        || hahn_echo(&model, &te, s.n_realizations, c.seed),
    );
    let (r, e) = (r?, e?);
    let fit = |t: &[f64], y: &[f64], lo: f64| -> Result<DecayFit, CliError> {
        let (ts, ys) = select_for_fit(t, y, lo, s.fit_hi);
        Ok(fit_decay(&ts, &ys, DecayModel::StretchedExponential)?)
    };
    let fr = fit(&tr, &r, s.fit_lo_ramsey)?;
    let fe = fit(&te, &e, s.fit_lo_echo)?;

    let mut rt = Table::new(&["tau_s", "contrast"]);
    for (t, y) in tr.iter().zip(&r) {
        rt.push(vec![(*t).into(), (*y).into()]);
    }
    let mut et = Table::new(&["tau_s", "echo"]);
    for (t, y) in te.iter().zip(&e) {
        et.push(vec![(*t).into(), (*y).into()]);
    }
    let mut pt = Table::new(&["f_hz", "s_omega"]);
    for f in model.components().0 {
        pt.push(vec![f.into(), model.psd(f).into()]);
    }
    Ok(vec![
        Artifact::table("ramsey", rt),
        Artifact::table("echo", et),
        Artifact::table("psd", pt),
        Artifact::json("fit_ramsey", fit_json(&fr)),
        Artifact::json("fit_echo", fit_json(&fe)),
    ])
}
