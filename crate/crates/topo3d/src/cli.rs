//! Command-line interface: flag parsing, config-file merging and run
//! orchestration.
//!
//! Precedence: CLI flags override `--config` file values, which override the
//! built-in defaults. Exit codes: 0 success, 2 argument or configuration
//! errors, 1 runtime errors.

use std::path::PathBuf;

use clap::Parser;
use serde::Deserialize;

use crate::error::{Result, TopoError};
use crate::fem::{MaterialModel, SolverBackend, SolverConfig};
use crate::filter::FilterMode;
use crate::geometry::{parse_stl, voxelize, ObstacleSpec};
use crate::optimizer::OcParams;
use crate::problem::{BcSpec, ExplicitBc, ProblemDefinition};
use crate::run::{execute_run, RunSettings};

#[derive(Debug, Parser)]
#[command(
    name = "topo3d",
    about = "3D compliance topology optimization on structured hexahedral grids",
    version
)]
pub struct Cli {
    /// Elements along x
    #[arg(long)]
    pub nelx: Option<usize>,
    /// Elements along y
    #[arg(long)]
    pub nely: Option<usize>,
    /// Elements along z
    #[arg(long)]
    pub nelz: Option<usize>,
    /// Target volume fraction over designable elements
    #[arg(long)]
    pub volfrac: Option<f64>,
    /// SIMP penalization exponent
    #[arg(long)]
    pub penal: Option<f64>,
    /// Sensitivity filter radius in element lengths
    #[arg(long)]
    pub rmin: Option<f64>,
    /// Iteration cap
    #[arg(long = "max-iter")]
    pub max_iter: Option<usize>,
    /// Convergence tolerance on the max density change
    #[arg(long)]
    pub tol: Option<f64>,
    /// Per-iteration move limit
    #[arg(long = "move")]
    pub move_limit: Option<f64>,
    /// Built-in problem (boundary conditions + load)
    #[arg(long, value_parser = ["cantilever"])]
    pub problem: Option<String>,
    /// Explicit boundary-condition JSON (overrides --problem)
    #[arg(long = "bc-config")]
    pub bc_config: Option<PathBuf>,
    /// Obstacle-region JSON
    #[arg(long = "obstacle-config")]
    pub obstacle_config: Option<PathBuf>,
    /// Design-domain STL; voxelized onto the grid
    #[arg(long = "design-stl")]
    pub design_stl: Option<PathBuf>,
    /// Density threshold for STL export
    #[arg(long = "export-threshold")]
    pub export_threshold: Option<f64>,
    /// Linear solver backend
    #[arg(long, value_parser = ["cg", "direct"])]
    pub solver: Option<String>,
    /// Relative residual tolerance for the iterative solver
    #[arg(long = "solver-tol")]
    pub solver_tol: Option<f64>,
    /// Sensitivity filter mode
    #[arg(long = "filter-mode", value_parser = ["plain", "density_weighted"])]
    pub filter_mode: Option<String>,
    /// Worker threads (0 = auto, 1 = sequential)
    #[arg(long)]
    pub threads: Option<usize>,
    /// Bit-reproducible outputs (timing columns in trace.csv zeroed)
    #[arg(long)]
    pub deterministic: bool,
    /// Output directory for run folders
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full-problem JSON config file
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Optional-everything mirror of the CLI for `--config` files.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub nelx: Option<usize>,
    pub nely: Option<usize>,
    pub nelz: Option<usize>,
    pub volfrac: Option<f64>,
    pub penal: Option<f64>,
    pub rmin: Option<f64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    #[serde(rename = "move")]
    pub move_limit: Option<f64>,
    pub problem: Option<String>,
    pub bc_config: Option<PathBuf>,
    pub obstacle_config: Option<PathBuf>,
    pub design_stl: Option<PathBuf>,
    pub export_threshold: Option<f64>,
    pub solver: Option<String>,
    pub solver_tol: Option<f64>,
    pub filter_mode: Option<String>,
    pub threads: Option<usize>,
    pub deterministic: Option<bool>,
    pub out: Option<PathBuf>,
}

/// Fully merged settings, ready to resolve into a problem definition.
#[derive(Debug)]
pub struct ResolvedConfig {
    pub problem: ProblemDefinition,
    pub settings: RunSettings,
    pub threads: usize,
}

pub fn resolve(cli: &Cli) -> Result<ResolvedConfig> {
    let file: FileConfig = match &cli.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => FileConfig::default(),
    };
    macro_rules! pick {
        ($field:ident, $default:expr) => {
            cli.$field.clone().or(file.$field.clone()).unwrap_or($default)
        };
    }

    let nelx = pick!(nelx, 32);
    let nely = pick!(nely, 16);
    let nelz = pick!(nelz, 16);
    let volfrac = pick!(volfrac, 0.2);
    let penal = pick!(penal, 3.0);
    let rmin = pick!(rmin, 4.0);

    let material = MaterialModel {
        penal,
        ..Default::default()
    };

    let mut oc = OcParams::new(volfrac);
    oc.move_limit = pick!(move_limit, 0.2);

    let backend = match pick!(solver, "cg".to_string()).as_str() {
        "cg" => SolverBackend::Cg,
        "direct" => SolverBackend::Direct,
        other => {
            return Err(TopoError::InvalidConfig(format!(
                "unknown solver backend `{other}`"
            )))
        }
    };
    let solver = SolverConfig {
        backend,
        rel_tol: pick!(solver_tol, 1e-8),
        max_iterations: None,
    };

    let filter_mode = match pick!(filter_mode, "density_weighted".to_string()).as_str() {
        "plain" => FilterMode::Plain,
        "density_weighted" => FilterMode::DensityWeighted,
        other => {
            return Err(TopoError::InvalidConfig(format!(
                "unknown filter mode `{other}`"
            )))
        }
    };

    let problem_name = pick!(problem, "cantilever".to_string());
    if problem_name != "cantilever" {
        return Err(TopoError::InvalidConfig(format!(
            "unknown built-in problem `{problem_name}`"
        )));
    }
    let bc = match cli.bc_config.clone().or(file.bc_config.clone()) {
        Some(path) => {
            let explicit: ExplicitBc = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            BcSpec::Explicit(explicit)
        }
        None => BcSpec::Cantilever,
    };

    let obstacles = match cli.obstacle_config.clone().or(file.obstacle_config.clone()) {
        Some(path) => Some(ObstacleSpec::from_json(&std::fs::read_to_string(path)?)?),
        None => None,
    };

    let domain = match cli.design_stl.clone().or(file.design_stl.clone()) {
        Some(path) => {
            let mesh = parse_stl(&std::fs::read(path)?)?;
            Some(voxelize(&mesh, (nelx, nely, nelz))?)
        }
        None => None,
    };

    let problem = ProblemDefinition {
        nelx,
        nely,
        nelz,
        material,
        oc,
        rmin,
        filter_mode,
        max_iter: pick!(max_iter, 200),
        change_tol: pick!(tol, 0.01),
        solver,
        bc,
        domain,
        obstacles,
    };
    problem.validate()?;

    let settings = RunSettings {
        out_dir: pick!(out, PathBuf::from("runs")),
        export_threshold: pick!(export_threshold, 0.5),
        deterministic: cli.deterministic || file.deterministic.unwrap_or(false),
    };
    if !(settings.export_threshold > 0.0 && settings.export_threshold < 1.0) {
        return Err(TopoError::InvalidConfig(format!(
            "export threshold must lie in (0, 1), got {}",
            settings.export_threshold
        )));
    }

    Ok(ResolvedConfig {
        problem,
        settings,
        threads: pick!(threads, 0),
    })
}

/// Parses argv, runs one optimization, writes the run directory.
/// Returns the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .try_init();

    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with success status.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let resolved = match resolve(&cli) {
        Ok(r) => r,
        Err(e) => {
            log::error!("configuration error: {e}");
            return 2;
        }
    };
    if resolved.threads > 1 {
        log::info!(
            "--threads {} requested; this build computes sequentially (results are \
             identical for any thread count)",
            resolved.threads
        );
    }
    match execute_run(&resolved.problem, &resolved.settings) {
        Ok(artifacts) => {
            let last = artifacts.trace.iterations.last();
            if let Some(r) = last {
                log::info!(
                    "finished after {} iterations: compliance {:.6e}, volume {:.4}",
                    artifacts.trace.iterations.len(),
                    r.compliance,
                    r.volume
                );
            }
            log::info!("outputs in {}", artifacts.run_dir.display());
            0
        }
        Err(e) => {
            log::error!("run failed: {e}");
            1
        }
    }
}
