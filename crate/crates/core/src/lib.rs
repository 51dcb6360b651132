// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation core for a space-time-modulated frequency-multiplier bus
//! driving a comb-addressed transmon array.
//!
//! - [`stpm_line`]: leapfrog field solver for the modulated Josephson line,
//!   harmonic spectra, isolation and wavepacket observables.
//! - [`transmon`]: charge-basis spectra, flux tuning, dispersive shift,
//!   addressing maps.
//! - [`error_budget`]: Purcell, dephasing and crosstalk gate-error model.
//! - [`nonmarkov`]: Lindblad and memory-kernel decay, effective rates,
//!   Ramsey/echo Monte Carlo and decay fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod error_budget;
pub mod nonmarkov;
pub mod stpm_line;
pub mod transmon;

pub use error::{Error, ErrorClass, Result};
pub use error_budget::{
    BusIsolationModel, BusKind, ErrorBudget, GainProfile, QubitArraySpec, SwapPhase,
};
pub use nonmarkov::{
    DecayFit, DecayModel, KernelKind, KernelSpec, NoiseKind, NoiseModel, Trace, TwoLevelState,
};
pub use stpm_line::{
    FluxDrive, LineGeometry, LineState, Port, SourceKind, SourceSpec, SpectrumReport, TimeStep,
    WavepacketMetrics,
};
pub use transmon::{AddressingSpec, QubitSpectrum, ReadoutSpec, TransmonSpec};
