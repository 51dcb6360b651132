// Copyright 2026 The stmbus Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario runner: resolves configuration, runs scenarios and sweeps, and
//! writes tidy tables plus a hashed `manifest.json`.

pub mod config;
pub mod error;
pub mod scenarios;
pub mod table;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use config::{Config, Scenario};
pub use error::CliError;
use scenarios::{Artifact, Payload, PointFailure, ScenarioOutput};
use table::{Cell, Format, Table};

pub const MANIFEST: &str = "manifest.json";

/// One invocation of the runner.
#[derive(Debug, Clone, Default)]
pub struct Request {
    pub scenario: String,
    pub config: Option<PathBuf>,
    pub sets: Vec<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// `axis=v1,v2,...`
    pub sweep: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub out_dir: PathBuf,
    pub files: Vec<FileEntry>,
    pub failures: Vec<PointFailure>,
}

impl Report {
    /// 0 when every point succeeded, otherwise the most severe failure code.
    pub fn exit_code(&self) -> i32 {
        self.failures
            .iter()
            .map(|f| f.error.exit_code())
            .max()
            .unwrap_or(0)
    }
}

struct Sweep {
    axis: String,
    values: Vec<f64>,
}

fn parse_sweep(raw: &str, resolved: &Value) -> Result<Sweep, CliError> {
    let (axis, list) = raw.split_once('=').ok_or_else(|| {
        CliError::Validation(format!("--sweep expects axis=v1,v2,..., got '{raw}'"))
    })?;
    let axis = axis.trim().to_string();
    match config::get_path(resolved, &axis) {
        Some(v) if v.is_number() || v.is_null() => {}
        Some(_) => {
            return Err(CliError::Validation(format!(
                "sweep axis '{axis}' is not a numeric leaf"
            )))
        }
        None => return Err(CliError::Validation(format!("unknown sweep axis '{axis}'"))),
    }
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Validation(format!("sweep value '{s}' is not a number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Sweep { axis, values })
}

/// Resolves the configuration tree for `req` without running anything.
pub fn resolve(req: &Request) -> Result<(Scenario, Value, Config), CliError> {
    let scenario = Scenario::parse(&req.scenario)
        .ok_or_else(|| CliError::Validation(format!("unknown scenario '{}'", req.scenario)))?;
    let mut v = config::resolve_value(req.config.as_deref(), &req.sets)?;
    if let Some(seed) = req.seed {
        v["seed"] = Value::from(seed);
    }
    if let Some(out) = &req.out {
        v["output_dir"] = Value::from(out.to_string_lossy().into_owned());
    }
    match v.get("scenario") {
        Some(Value::Null) | None => {}
        Some(Value::String(s)) if s == scenario.name() => {}
        Some(other) => {
            return Err(CliError::Validation(format!(
                "config names scenario {other} but '{}' was requested",
                scenario.name()
            )))
        }
    }
    v["scenario"] = Value::from(scenario.name());
    let cfg = config::from_value(&v)?;
    Ok((scenario, v, cfg))
}

fn render(a: &Artifact, format: Format) -> (String, Vec<u8>) {
    match &a.payload {
        Payload::Table(t) => (
            format!("{}.{}", a.stem, format.extension()),
            t.render(format),
        ),
        Payload::Json(v) => {
            let mut bytes = serde_json::to_vec_pretty(v).expect("json values serialize");
            bytes.push(b'\n');
            (format!("{}.json", a.stem), bytes)
        }
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Writes every file or none: on error the files already written are removed.
fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), CliError> {
    let mut written: Vec<PathBuf> = Vec::new();
    let result = (|| -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        for (name, bytes) in files {
            let p = dir.join(name);
            if let Some(parent) = p.parent() {
                fs::create_dir_all(parent)
                    .map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
            }
            fs::write(&p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
            written.push(p);
        }
        Ok(())
    })();
    if result.is_err() {
        for p in &written {
            let _ = fs::remove_file(p);
        }
    }
    result
}

fn failure_json(f: &PointFailure) -> Value {
    json!({ "point": f.label, "exit_code": f.error.exit_code(), "error": f.error.to_string() })
}

/// Tables shared by several sweep points, concatenated with the swept value prepended.
fn merge_points(axis: &str, points: &[(f64, ScenarioOutput)]) -> Vec<Artifact> {
    let mut merged: BTreeMap<String, Table> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (x, out) in points {
        for a in &out.artifacts {
            if let Payload::Table(t) = &a.payload {
                let keyed = t.keyed(axis, Cell::F(*x));
                match merged.get_mut(&a.stem) {
                    Some(m) if m.header == keyed.header => m.rows.extend(keyed.rows),
                    Some(_) => {}
                    None => {
                        order.push(a.stem.clone());
                        merged.insert(a.stem.clone(), keyed);
                    }
                }
            }
        }
    }
    order
        .into_iter()
        .map(|stem| Artifact {
            stem: format!("sweep_{stem}"),
            payload: Payload::Table(merged.remove(&stem).expect("stem recorded")),
        })
        .collect()
}

/// Runs `req` to completion and writes its outputs.
///
/// Configuration problems fail before anything is written. Sweep points that
/// fail are listed in the manifest and reflected in [`Report::exit_code`].
pub fn run(req: &Request) -> Result<Report, CliError> {
    let (scenario, resolved, cfg) = resolve(req)?;
    let out_dir = PathBuf::from(&cfg.output_dir);
    let format = cfg.format;

    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    let mut failures: Vec<PointFailure> = Vec::new();
    let mut sweep_json = Value::Null;

    match &req.sweep {
        None => {
            let out = scenarios::run(scenario, &cfg)?;
            files.extend(out.artifacts.iter().map(|a| render(a, format)));
            failures.extend(out.failures);
        }
        Some(raw) => {
            let sweep = parse_sweep(raw, &resolved)?;
            let leaf = config::get_path(&resolved, &sweep.axis)
                .cloned()
                .unwrap_or(Value::Null);
            let results: Vec<Result<ScenarioOutput, CliError>> = sweep
                .values
                .par_iter()
                .map(|&x| {
                    let mut v = resolved.clone();
                    config::set_path(&mut v, &sweep.axis, config::numeric_like(&leaf, x)?)?;
                    let c = config::from_value(&v)?;
                    scenarios::run(scenario, &c)
                })
                .collect();
            let mut ok: Vec<(f64, ScenarioOutput)> = Vec::new();
            let mut points = Vec::new();
            for (k, (&x, r)) in sweep.values.iter().zip(results).enumerate() {
                let dir = format!("point_{k:03}");
                match r {
                    Ok(out) => {
                        for a in &out.artifacts {
                            let (name, bytes) = render(a, format);
                            files.push((format!("{dir}/{name}"), bytes));
                        }
                        let point_failures: Vec<PointFailure> = out
                            .failures
                            .iter()
                            .map(|f| PointFailure {
                                label: format!("{}={x}:{}", sweep.axis, f.label),
                                error: f.error.clone(),
                            })
                            .collect();
                        points.push(json!({
                            "index": k, "value": x, "dir": dir,
                            "status": if point_failures.is_empty() { "ok" } else { "partial" },
                        }));
                        failures.extend(point_failures);
                        ok.push((x, out));
                    }
                    Err(error) => {
                        points.push(json!({
                            "index": k, "value": x, "dir": Value::Null, "status": "failed",
                            "error": error.to_string(),
                        }));
                        failures.push(PointFailure {
                            label: format!("{}={x}", sweep.axis),
                            error,
                        });
                    }
                }
            }
            files.extend(
                merge_points(&sweep.axis, &ok)
                    .iter()
                    .map(|a| render(a, format)),
            );
            sweep_json = json!({ "axis": sweep.axis, "values": sweep.values, "points": points });
        }
    }

    let entries: Vec<FileEntry> = files
        .iter()
        .map(|(path, bytes)| FileEntry {
            path: path.clone(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        })
        .collect();
    let manifest = json!({
        "scenario": scenario.name(),
        "seed": cfg.seed,
        "format": format,
        "config": resolved,
        "sweep": sweep_json,
        "files": entries
            .iter()
            .map(|e| json!({ "path": e.path, "sha256": e.sha256, "bytes": e.bytes }))
            .collect::<Vec<_>>(),
        "failures": failures.iter().map(failure_json).collect::<Vec<_>>(),
    });
    let mut mbytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    mbytes.push(b'\n');
    files.push((MANIFEST.to_string(), mbytes));
    write_all(&out_dir, &files)?;
    Ok(Report {
        out_dir,
        files: entries,
        failures,
    })
}
