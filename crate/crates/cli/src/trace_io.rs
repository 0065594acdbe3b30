//! Trace persistence: a plot-ready CSV plus a JSON sidecar with the
//! config echo, constants, and check outcomes.
//!
//! The CSV is byte-deterministic for a fixed config and seed. Timing
//! lives only in the sidecar, which is therefore excluded from the
//! byte-identity guarantee.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use pairig::trace::RunTrace;

pub const TRACE_HEADER: &str =
    "epoch,agent,gamma,eta,objective,infeasibility,consensus_dist,invariant_max_residual";

/// Writes one CSV row per (logged epoch, agent), agents one-based.
/// Truncated runs get a trailing `# truncated:` comment line.
pub fn write_trace_csv(trace: &RunTrace<f64>, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    writeln!(out, "{TRACE_HEADER}")?;
    for record in &trace.records {
        for (idx, agent) in record.agents.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                record.epoch,
                idx + 1,
                record.gamma,
                record.eta,
                agent.objective,
                agent
                    .infeasibility
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
                agent.consensus_dist,
                record
                    .invariant_max_residual
                    .map(|v| v.to_string())
                    .unwrap_or_default(),
            )?;
        }
    }
    if let Some(reason) = &trace.truncated {
        writeln!(out, "# truncated: {reason}")?;
    }
    std::fs::write(path, out).with_context(|| format!("writing trace {}", path.display()))?;
    Ok(())
}

/// Companion metadata written next to the CSV.
#[derive(Debug, Serialize)]
pub struct Sidecar {
    pub schema: &'static str,
    pub config: Value,
    pub rng_algorithm: &'static str,
    pub dykstra_tolerance: f64,
    pub dykstra_max_sweeps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svm_box_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub validation: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Value>,
    pub invariant_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncated: Option<String>,
    pub elapsed_seconds: f64,
}

pub fn sidecar_path(trace_path: &Path) -> PathBuf {
    let mut name = trace_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".to_string());
    name.push_str(".sidecar.json");
    trace_path.with_file_name(name)
}

pub fn write_sidecar(sidecar: &Sidecar, trace_path: &Path) -> Result<PathBuf> {
    let path = sidecar_path(trace_path);
    let body = serde_json::to_string_pretty(sidecar)?;
    std::fs::write(&path, body)
        .with_context(|| format!("writing sidecar {}", path.display()))?;
    Ok(path)
}
