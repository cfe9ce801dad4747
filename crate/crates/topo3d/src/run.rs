//! Run orchestration: output directory management, trace/summary/timing
//! reports and STL export for one optimization run.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::error::{Result, TopoError};
use crate::geometry::export_stl;
use crate::optimizer::{run_optimization, DensityField, OptimizationTrace};
use crate::problem::ProblemDefinition;

pub const PHASE_NAMES: [&str; 4] = ["assembly", "solve", "filter", "update"];

#[derive(Debug, Clone)]
pub struct RunSettings {
    /// Parent directory for run outputs.
    pub out_dir: PathBuf,
    /// Density threshold for the STL export.
    pub export_threshold: f64,
    /// Zero the wall-clock columns in trace.csv so identical runs produce
    /// bit-identical files; timing_report.json keeps the real timings.
    pub deterministic: bool,
}

impl Default for RunSettings {
    fn default() -> Self {
        RunSettings {
            out_dir: PathBuf::from("runs"),
            export_threshold: 0.5,
            deterministic: false,
        }
    }
}

#[derive(Debug)]
pub struct RunArtifacts {
    pub run_dir: PathBuf,
    pub density: DensityField,
    pub trace: OptimizationTrace,
}

/// Creates `<out>/run_<timestamp>[_<n>]`, never reusing an existing path.
pub fn create_run_dir(out_dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let mut suffix = 0u32;
    loop {
        let name = if suffix == 0 {
            format!("run_{stamp}")
        } else {
            format!("run_{stamp}_{suffix}")
        };
        let candidate = out_dir.join(name);
        match std::fs::create_dir(&candidate) {
            Ok(()) => return Ok(candidate),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => suffix += 1,
            Err(e) => return Err(e.into()),
        }
    }
}

/// Runs the optimization and writes trace.csv, summary.json,
/// timing_report.json and result.stl into a fresh run directory. On an
/// optimization failure the partial trace is still written for diagnosis.
pub fn execute_run(problem: &ProblemDefinition, settings: &RunSettings) -> Result<RunArtifacts> {
    let run_dir = create_run_dir(&settings.out_dir)?;
    log::info!("writing outputs to {}", run_dir.display());

    let (density, trace) = match run_optimization(problem) {
        Ok(ok) => ok,
        Err(failure) => {
            let _ = write_trace_csv(
                &run_dir.join("trace.csv"),
                &failure.partial_trace,
                settings.deterministic,
            );
            return Err(failure.error);
        }
    };

    write_trace_csv(&run_dir.join("trace.csv"), &trace, settings.deterministic)?;
    write_summary_json(&run_dir.join("summary.json"), problem, &density, &trace)?;
    write_timing_report(&run_dir.join("timing_report.json"), &trace)?;
    let stl = export_stl(
        &density,
        (problem.nelx, problem.nely, problem.nelz),
        settings.export_threshold,
    )?;
    std::fs::write(run_dir.join("result.stl"), stl)?;

    Ok(RunArtifacts {
        run_dir,
        density,
        trace,
    })
}

pub fn write_trace_csv(path: &Path, trace: &OptimizationTrace, deterministic: bool) -> Result<()> {
    let mut out = String::new();
    out.push_str("iter,compliance,volume,change,t_assembly,t_solve,t_filter,t_update\n");
    for r in &trace.iterations {
        let (ta, ts, tf, tu) = if deterministic {
            (0.0, 0.0, 0.0, 0.0)
        } else {
            (r.t_assembly, r.t_solve, r.t_filter, r.t_update)
        };
        writeln!(
            out,
            "{},{:.12e},{:.12e},{:.12e},{:.6},{:.6},{:.6},{:.6}",
            r.iter, r.compliance, r.volume, r.change, ta, ts, tf, tu
        )
        .expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

fn write_summary_json(
    path: &Path,
    problem: &ProblemDefinition,
    density: &DensityField,
    trace: &OptimizationTrace,
) -> Result<()> {
    let last = trace
        .iterations
        .last()
        .ok_or_else(|| TopoError::InvalidConfig("trace is empty".into()))?;
    let (ta, ts, tf, tu) = trace.phase_totals();
    let summary = serde_json::json!({
        "dims": [problem.nelx, problem.nely, problem.nelz],
        "volfrac": problem.oc.volfrac,
        "penal": problem.material.penal,
        "rmin": problem.rmin,
        "iterations": trace.iterations.len(),
        "final_compliance": last.compliance,
        "final_volume": density.designable_volume_fraction(),
        "final_change": last.change,
        "phase_totals_seconds": {
            "assembly": ta,
            "solve": ts,
            "filter": tf,
            "update": tu,
        },
    });
    std::fs::write(path, serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}

/// Four phases with seconds and percent of the loop total.
pub fn write_timing_report(path: &Path, trace: &OptimizationTrace) -> Result<()> {
    let totals = trace.phase_totals();
    let seconds = [totals.0, totals.1, totals.2, totals.3];
    let total: f64 = seconds.iter().sum();
    let phases: Vec<serde_json::Value> = PHASE_NAMES
        .iter()
        .zip(seconds)
        .map(|(name, s)| {
            serde_json::json!({
                "phase": name,
                "seconds": s,
                "percent": if total > 0.0 { 100.0 * s / total } else { 0.0 },
            })
        })
        .collect();
    let report = serde_json::json!({
        "phases": phases,
        "total_seconds": total,
        "iterations": trace.iterations.len(),
    });
    std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    Ok(())
}
