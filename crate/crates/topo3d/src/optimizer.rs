//! SIMP/OC optimization loop: sensitivities, bisection on the volume
//! multiplier, move-limited density updates with passive regions, and
//! convergence control with per-phase timing.

use std::time::Instant;

use crate::error::{Result, TopoError};
use crate::fem::{
    annotate_solver_failure, solve_reduced, ElementStiffness, GlobalAssembler, MaterialModel,
    ReducedSystem,
};
use crate::filter::{apply_sensitivity_filter, build_filter};
use crate::mesh::{build_mesh, GridMesh};
use crate::problem::ProblemDefinition;

/// Per-element pseudo-densities plus design/passive masks.
///
/// Passive elements keep `passive_value` forever; updates only touch
/// elements with `design_mask[e] == true`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub rho: Vec<f64>,
    pub design_mask: Vec<bool>,
    /// Pinned density per passive element (ignored where designable).
    pub passive_value: Vec<f64>,
}

impl DensityField {
    /// All-designable field at a uniform density.
    pub fn uniform(n: usize, value: f64) -> Self {
        DensityField {
            rho: vec![value; n],
            design_mask: vec![true; n],
            passive_value: vec![0.0; n],
        }
    }

    /// Field with masks: designable elements start at `init`, passive ones
    /// at their pinned value.
    pub fn with_masks(init: f64, design_mask: Vec<bool>, passive_value: Vec<f64>) -> Self {
        let rho = design_mask
            .iter()
            .zip(&passive_value)
            .map(|(&d, &p)| if d { init } else { p })
            .collect();
        DensityField {
            rho,
            design_mask,
            passive_value,
        }
    }

    pub fn n_designable(&self) -> usize {
        self.design_mask.iter().filter(|&&d| d).count()
    }

    /// Mean density over designable elements.
    pub fn designable_volume_fraction(&self) -> f64 {
        let (sum, count) = self
            .rho
            .iter()
            .zip(&self.design_mask)
            .filter(|(_, &d)| d)
            .fold((0.0, 0usize), |(s, c), (&r, _)| (s + r, c + 1));
        sum / count as f64
    }
}

/// Optimality-criteria update parameters.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct OcParams {
    /// Target volume fraction over designable elements.
    pub volfrac: f64,
    /// Move limit per iteration.
    pub move_limit: f64,
    /// Relative bracket tolerance for the multiplier bisection.
    pub bisect_tol: f64,
    /// Initial upper bound of the multiplier bracket.
    pub bisect_hi: f64,
}

impl OcParams {
    pub fn new(volfrac: f64) -> Self {
        OcParams {
            volfrac,
            move_limit: 0.2,
            bisect_tol: 1e-3,
            bisect_hi: 1e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.volfrac > 0.0 && self.volfrac < 1.0) {
            return Err(TopoError::InvalidConfig(format!(
                "volfrac must lie in (0, 1), got {}",
                self.volfrac
            )));
        }
        if !(self.move_limit > 0.0 && self.move_limit <= 1.0) {
            return Err(TopoError::InvalidConfig(format!(
                "move limit must lie in (0, 1], got {}",
                self.move_limit
            )));
        }
        Ok(())
    }
}

/// One optimization iteration's scalars and phase timings (seconds).
#[derive(Debug, Clone, serde::Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub compliance: f64,
    pub volume: f64,
    pub change: f64,
    pub t_assembly: f64,
    pub t_solve: f64,
    pub t_filter: f64,
    pub t_update: f64,
}

#[derive(Debug, Clone, Default)]
pub struct OptimizationTrace {
    pub iterations: Vec<IterationRecord>,
}

impl OptimizationTrace {
    /// Total seconds per phase: (assembly, solve, filter, update).
    pub fn phase_totals(&self) -> (f64, f64, f64, f64) {
        self.iterations.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, r| {
            (
                acc.0 + r.t_assembly,
                acc.1 + r.t_solve,
                acc.2 + r.t_filter,
                acc.3 + r.t_update,
            )
        })
    }
}

/// An optimization failure carrying the trace recorded so far.
#[derive(Debug)]
pub struct OptimizationFailure {
    pub error: TopoError,
    pub partial_trace: OptimizationTrace,
}

/// Compliance, compliance sensitivities and volume sensitivities for the
/// current displacement solution.
///
/// dc_e = -p rho_e^(p-1) (e0 - emin) u_e^T ke u_e, dv_e = 1 on designable
/// elements and 0 on passive ones. The compliance is the element energy sum,
/// which equals F^T U for the solved system.
pub fn compute_sensitivities(
    u: &[f64],
    mesh: &GridMesh,
    ke: &ElementStiffness,
    rho: &DensityField,
    mat: &MaterialModel,
) -> (f64, Vec<f64>, Vec<f64>) {
    let n = mesh.n_elements();
    let mut c = 0.0;
    let mut dc = vec![0.0; n];
    let mut dv = vec![0.0; n];
    let mut ue = [0.0f64; 24];
    for e in 0..n {
        let edof = &mesh.edof_map[e];
        for (i, &d) in edof.iter().enumerate() {
            ue[i] = u[d];
        }
        let mut q = 0.0;
        for i in 0..24 {
            let mut s = 0.0;
            let row = &ke.ke[i];
            for j in 0..24 {
                s += row[j] * ue[j];
            }
            q += ue[i] * s;
        }
        let r = rho.rho[e];
        c += mat.modulus(r) * q;
        dc[e] = -mat.penal * r.powf(mat.penal - 1.0) * (mat.e0 - mat.emin) * q;
        dv[e] = if rho.design_mask[e] { 1.0 } else { 0.0 };
    }
    (c, dc, dv)
}

/// Move-limited OC density update with bisection on the volume multiplier.
///
/// Filtered sensitivities may carry tiny positive noise; they are clamped to
/// zero before the square root.
pub fn oc_update(
    rho: &DensityField,
    dc: &[f64],
    dv: &[f64],
    params: &OcParams,
) -> Result<DensityField> {
    params.validate()?;
    let n = rho.rho.len();
    if dc.len() != n || dv.len() != n {
        return Err(TopoError::DimensionMismatch {
            expected: n,
            got: dc.len(),
        });
    }
    let designable: Vec<usize> = (0..n).filter(|&e| rho.design_mask[e]).collect();
    if designable.is_empty() {
        return Err(TopoError::AllPassive);
    }
    let nd = designable.len() as f64;

    // Feasible volume range under the move limits.
    let (mut vol_min, mut vol_max) = (0.0, 0.0);
    for &e in &designable {
        vol_min += (rho.rho[e] - params.move_limit).max(0.0);
        vol_max += (rho.rho[e] + params.move_limit).min(1.0);
    }
    vol_min /= nd;
    vol_max /= nd;
    if params.volfrac < vol_min - 1e-12 || params.volfrac > vol_max + 1e-12 {
        return Err(TopoError::BisectionFailure {
            target: params.volfrac,
            lo: vol_min,
            hi: vol_max,
        });
    }

    let mut new_rho = rho.rho.clone();
    let update_for = |lambda: f64, out: &mut [f64]| -> f64 {
        let mut vol = 0.0;
        for &e in &designable {
            let r = rho.rho[e];
            let b = (-dc[e].min(0.0)) / (lambda * dv[e]);
            let candidate = r * b.sqrt();
            let v = candidate
                .min(r + params.move_limit)
                .min(1.0)
                .max(r - params.move_limit)
                .max(0.0);
            out[e] = v;
            vol += v;
        }
        vol / nd
    };

    // Achieved volume is non-increasing in the multiplier. Grow the upper
    // bound if the configured bracket does not yet cover the root (huge
    // sensitivities can push the root past it).
    let mut hi = params.bisect_hi;
    while update_for(hi, &mut new_rho) > params.volfrac && hi < 1e30 {
        hi *= 16.0;
    }

    // Bisect until the bracket is tight and the constraint is met. The extra
    // volume condition keeps the post-update volume within the trace
    // invariant even when the bracket tolerance alone would leave it
    // slightly off.
    let mut lo = 0.0_f64;
    let mut vol = f64::NAN;
    for _ in 0..256 {
        let bracket_done = (hi - lo) / (hi + lo) < params.bisect_tol;
        if bracket_done && (vol - params.volfrac).abs() <= 1e-7 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        vol = update_for(mid, &mut new_rho);
        if vol > params.volfrac {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (vol - params.volfrac).abs() > 1e-4 {
        return Err(TopoError::BisectionFailure {
            target: params.volfrac,
            lo: vol_min,
            hi: vol_max,
        });
    }

    Ok(DensityField {
        rho: new_rho,
        design_mask: rho.design_mask.clone(),
        passive_value: rho.passive_value.clone(),
    })
}

/// Runs the full assemble / solve / filter / update loop.
///
/// Designable densities start at the target volume fraction; passive
/// elements stay pinned. Stops when the max density change drops below
/// `change_tol` or after `max_iter` iterations. On error the trace recorded
/// so far is returned alongside the error.
pub fn run_optimization(
    problem: &ProblemDefinition,
) -> std::result::Result<(DensityField, OptimizationTrace), Box<OptimizationFailure>> {
    run_optimization_observed(problem, &mut |_, _| {})
}

/// Like [`run_optimization`], but calls `observer` with the density field and
/// record after every iteration (progress reporting, invariant checks).
pub fn run_optimization_observed(
    problem: &ProblemDefinition,
    observer: &mut dyn FnMut(&DensityField, &IterationRecord),
) -> std::result::Result<(DensityField, OptimizationTrace), Box<OptimizationFailure>> {
    let mut trace = OptimizationTrace::default();
    run_inner(problem, &mut trace, observer)
        .map(|field| (field, std::mem::take(&mut trace)))
        .map_err(|error| {
            Box::new(OptimizationFailure {
                error,
                partial_trace: trace,
            })
        })
}

fn run_inner(
    problem: &ProblemDefinition,
    trace: &mut OptimizationTrace,
    observer: &mut dyn FnMut(&DensityField, &IterationRecord),
) -> Result<DensityField> {
    problem.validate()?;
    let mesh = build_mesh(problem.nelx, problem.nely, problem.nelz)?;
    let ke = crate::fem::build_element_stiffness(problem.material.nu)?;
    let assembler = GlobalAssembler::new(&mesh);
    let filter = build_filter(&mesh, problem.rmin)?;
    let bc = problem.boundary_setup(&mesh)?;
    let reduced = ReducedSystem::new(mesh.n_dofs, &bc)?;

    let (design_mask, passive_value) = problem.masks(&mesh)?;
    let mut rho = DensityField::with_masks(problem.oc.volfrac, design_mask, passive_value);
    if rho.n_designable() == 0 {
        return Err(TopoError::AllPassive);
    }

    let mut k_full = crate::fem::CsrMatrix {
        n_rows: 0,
        n_cols: 0,
        row_ptr: vec![0],
        col_idx: Vec::new(),
        values: Vec::new(),
    };
    let mut u_free_prev: Option<Vec<f64>> = None;

    for iter in 1..=problem.max_iter {
        let t = Instant::now();
        assembler.assemble_into(&ke, &rho, &problem.material, &mut k_full)?;
        let k_ff = reduced.reduce_matrix(&k_full);
        let t_assembly = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let (u_free, stats) = solve_reduced(
            &k_ff,
            &reduced.reduced_load,
            &problem.solver,
            u_free_prev.as_deref(),
        )
        .map_err(|e| annotate_solver_failure(e, &bc))?;
        let t_solve = t.elapsed().as_secs_f64();
        let u = reduced.expand(&u_free);
        u_free_prev = Some(u_free);

        let t = Instant::now();
        let (c, dc, dv) = compute_sensitivities(&u, &mesh, &ke, &rho, &problem.material);
        let t_sens = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let dc_filtered = apply_sensitivity_filter(&filter, &rho, &dc, problem.filter_mode)?;
        let t_filter = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let new_rho = oc_update(&rho, &dc_filtered, &dv, &problem.oc)?;
        let change = rho
            .rho
            .iter()
            .zip(&new_rho.rho)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        rho = new_rho;
        let t_update = t_sens + t.elapsed().as_secs_f64();

        let volume = rho.designable_volume_fraction();
        trace.iterations.push(IterationRecord {
            iter,
            compliance: c,
            volume,
            change,
            t_assembly,
            t_solve,
            t_filter,
            t_update,
        });
        log::info!(
            "iter {iter:4}  c = {c:10.4e}  vol = {volume:.4}  change = {change:.4}  cg_iters = {}",
            stats.iterations
        );
        observer(&rho, trace.iterations.last().expect("record just pushed"));

        if change < problem.change_tol {
            break;
        }
    }
    Ok(rho)
}
