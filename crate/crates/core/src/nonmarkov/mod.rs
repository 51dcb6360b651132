// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Two-level decay with and without memory, effective rates, and
//! Ramsey/echo signatures of classical frequency noise.
//!
//! The density matrix is indexed with 0 = excited, 1 = ground, so `rho00`
//! is the decaying population.

mod dynamics;
mod fit;
mod noise;

pub use dynamics::{
    evolve_kernel, evolve_markovian, evolve_markovian_rk4, gamma_eff, gamma_eff_segments,
    KernelKind, KernelSpec, RateSegment, Trace, TwoLevelState,
};
pub use fit::{fit_decay, select_for_fit, DecayFit, DecayModel};
pub use noise::{hahn_echo, ramsey, synthesize_noise, NoiseKind, NoiseModel};
