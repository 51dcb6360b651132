// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use stmbus_cli::{run, Request};

/// Run an stmbus scenario and write its data files.
#[derive(Debug, Parser)]
#[command(name = "stmbus", version)]
struct Args {
    /// line-sim, flux-sweep, addressing, error-budget, scalability, nonmarkov or spectroscopy
    scenario: String,
    /// JSON config overlaid on the shipped defaults
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one leaf, e.g. --set line.phi_dc_rad=0.7 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory (overrides output_dir)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sweep one numeric leaf, e.g. --sweep line.phi_rf_rad=0.2,0.4
    #[arg(long, value_name = "AXIS=V1,V2,...")]
    sweep: Option<String>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let req = Request {
        scenario: args.scenario,
        config: args.config,
        sets: args.sets,
        out: args.out,
        seed: args.seed,
        sweep: args.sweep,
    };
    match run(&req) {
        Ok(report) => {
            eprintln!(
                "wrote {} files to {}",
                report.files.len() + 1,
                report.out_dir.display()
            );
            for f in &report.failures {
                eprintln!("point {} failed: {}", f.label, f.error);
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("stmbus: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
