//! Finite element analysis: element stiffness, global assembly, boundary
//! conditions and the linear solve K U = F.

pub mod element;
pub mod solver;
pub mod sparse;

pub use element::{build_element_stiffness, ElementStiffness};
pub use solver::{solve_reduced, SolverBackend, SolverConfig};
pub use sparse::{assemble_global, CsrMatrix, GlobalAssembler};

use crate::error::{Result, TopoError};

/// SIMP material: E(rho) = emin + rho^penal * (e0 - emin).
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MaterialModel {
    pub e0: f64,
    pub emin: f64,
    pub nu: f64,
    pub penal: f64,
}

impl Default for MaterialModel {
    fn default() -> Self {
        MaterialModel {
            e0: 1.0,
            emin: 1e-9,
            nu: 0.3,
            penal: 3.0,
        }
    }
}

impl MaterialModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.emin > 0.0 && self.emin < self.e0) {
            return Err(TopoError::InvalidConfig(format!(
                "need 0 < emin < e0, got emin={} e0={}",
                self.emin, self.e0
            )));
        }
        if self.penal < 1.0 {
            return Err(TopoError::InvalidConfig(format!(
                "SIMP exponent must be >= 1, got {}",
                self.penal
            )));
        }
        if !(0.0..0.5).contains(&self.nu) {
            return Err(TopoError::InvalidPoissonRatio(self.nu));
        }
        Ok(())
    }

    pub fn modulus(&self, rho: f64) -> f64 {
        self.emin + rho.powf(self.penal) * (self.e0 - self.emin)
    }
}

/// Constrained DOFs and the sparse load vector.
#[derive(Debug, Clone)]
pub struct BoundarySetup {
    /// Sorted, deduplicated constrained DOF indices.
    pub fixed_dofs: Vec<usize>,
    /// Sparse load map (dof, force); loads on fixed DOFs are dropped.
    pub loads: Vec<(usize, f64)>,
}

impl BoundarySetup {
    pub fn new(mut fixed_dofs: Vec<usize>, loads: Vec<(usize, f64)>) -> Self {
        fixed_dofs.sort_unstable();
        fixed_dofs.dedup();
        let kept: Vec<(usize, f64)> = loads
            .into_iter()
            .filter(|(dof, _)| {
                let on_fixed = fixed_dofs.binary_search(dof).is_ok();
                if on_fixed {
                    log::warn!("dropping load on fixed DOF {dof}");
                }
                !on_fixed
            })
            .collect();
        BoundarySetup {
            fixed_dofs,
            loads: kept,
        }
    }

    pub fn validate(&self, n_dofs: usize) -> Result<()> {
        if let Some(&d) = self.fixed_dofs.iter().find(|&&d| d >= n_dofs) {
            return Err(TopoError::InvalidConfig(format!(
                "fixed DOF {d} out of range (n_dofs = {n_dofs})"
            )));
        }
        if let Some(&(d, _)) = self.loads.iter().find(|&&(d, _)| d >= n_dofs) {
            return Err(TopoError::InvalidConfig(format!(
                "load DOF {d} out of range (n_dofs = {n_dofs})"
            )));
        }
        Ok(())
    }

    pub fn is_fixed(&self, dof: usize) -> bool {
        self.fixed_dofs.binary_search(&dof).is_ok()
    }
}

/// Free-DOF bookkeeping reused across optimization iterations.
pub struct ReducedSystem {
    pub free_dofs: Vec<usize>,
    pub reduced_load: Vec<f64>,
    n_dofs: usize,
}

impl ReducedSystem {
    pub fn new(n_dofs: usize, bc: &BoundarySetup) -> Result<Self> {
        bc.validate(n_dofs)?;
        let free_dofs: Vec<usize> = (0..n_dofs).filter(|&d| !bc.is_fixed(d)).collect();
        let mut dof_to_free = vec![usize::MAX; n_dofs];
        for (i, &d) in free_dofs.iter().enumerate() {
            dof_to_free[d] = i;
        }
        let mut reduced_load = vec![0.0; free_dofs.len()];
        for &(dof, f) in &bc.loads {
            reduced_load[dof_to_free[dof]] += f;
        }
        Ok(ReducedSystem {
            free_dofs,
            reduced_load,
            n_dofs,
        })
    }

    pub fn reduce_matrix(&self, k_full: &CsrMatrix) -> CsrMatrix {
        k_full.submatrix(&self.free_dofs)
    }

    /// Expands a free-DOF solution to the full DOF vector (fixed DOFs zero).
    pub fn expand(&self, u_free: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.n_dofs];
        for (&dof, &v) in self.free_dofs.iter().zip(u_free) {
            u[dof] = v;
        }
        u
    }
}

/// Solves K U = F with fixed DOFs eliminated by free-submatrix extraction.
/// `k_full` is the full pre-BC matrix; the returned vector has length n_dofs
/// with exact zeros on fixed DOFs.
pub fn solve_displacements(
    k_full: &CsrMatrix,
    bc: &BoundarySetup,
    cfg: &SolverConfig,
) -> Result<Vec<f64>> {
    let reduced = ReducedSystem::new(k_full.n_rows, bc)?;
    let k_ff = reduced.reduce_matrix(k_full);
    let result = solve_reduced(&k_ff, &reduced.reduced_load, cfg, None);
    let (u_free, _) = result.map_err(|e| annotate_solver_failure(e, bc))?;
    Ok(reduced.expand(&u_free))
}

/// A solve can fail because the matrix truly is singular or because the
/// constraints leave rigid-body modes; fewer than 6 constrained DOFs always
/// means the latter.
pub fn annotate_solver_failure(err: TopoError, bc: &BoundarySetup) -> TopoError {
    if bc.fixed_dofs.len() < 6 {
        TopoError::InsufficientConstraints(format!(
            "only {} fixed DOFs; {err}",
            bc.fixed_dofs.len()
        ))
    } else {
        err
    }
}

/// Compliance c = F^T U over the sparse load map.
pub fn compliance(u: &[f64], loads: &[(usize, f64)]) -> f64 {
    loads.iter().map(|&(dof, f)| f * u[dof]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, GridMesh};
    use crate::optimizer::DensityField;

    fn bottom_fixed_bc(mesh: &GridMesh, load: Vec<(usize, f64)>) -> BoundarySetup {
        // Fix all DOFs of the iz = 0 plane.
        let mut fixed = Vec::new();
        for ix in 0..=mesh.nelx {
            for iy in 0..=mesh.nely {
                let n = mesh.node_id(ix, iy, 0);
                fixed.extend([3 * n, 3 * n + 1, 3 * n + 2]);
            }
        }
        BoundarySetup::new(fixed, load)
    }

    #[test]
    fn loads_on_fixed_dofs_are_dropped() {
        let bc = BoundarySetup::new(vec![3, 1, 1], vec![(1, 5.0), (7, -2.0)]);
        assert_eq!(bc.fixed_dofs, vec![1, 3]);
        assert_eq!(bc.loads, vec![(7, -2.0)]);
    }

    #[test]
    fn zero_load_gives_zero_displacements() {
        let mesh = build_mesh(1, 1, 1).unwrap();
        let ke = build_element_stiffness(0.3).unwrap();
        let mat = MaterialModel::default();
        let rho = DensityField::uniform(1, 1.0);
        let k = assemble_global(&mesh, &ke, &rho, &mat).unwrap();
        let bc = bottom_fixed_bc(&mesh, vec![]);
        let u = solve_displacements(&k, &bc, &SolverConfig::default()).unwrap();
        assert!(u.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_element_matches_dense_direct_oracle() {
        let mesh = build_mesh(1, 1, 1).unwrap();
        let ke = build_element_stiffness(0.3).unwrap();
        let mat = MaterialModel::default();
        let rho = DensityField::uniform(1, 1.0);
        let k = assemble_global(&mesh, &ke, &rho, &mat).unwrap();

        // Unit load on a top node, -z.
        let top = mesh.node_id(0, 0, 1);
        let bc = bottom_fixed_bc(&mesh, vec![(3 * top + 2, -1.0)]);
        let u = solve_displacements(&k, &bc, &SolverConfig::default()).unwrap();

        // Dense oracle: Gaussian elimination on the free submatrix.
        let reduced = ReducedSystem::new(mesh.n_dofs, &bc).unwrap();
        let kff = reduced.reduce_matrix(&k).to_dense();
        let nf = reduced.free_dofs.len();
        let m = nalgebra::DMatrix::from_fn(nf, nf, |i, j| kff[i][j]);
        let b = nalgebra::DVector::from_iterator(nf, reduced.reduced_load.iter().copied());
        let x = m.lu().solve(&b).unwrap();
        let u_oracle = reduced.expand(x.as_slice());

        let scale = u_oracle.iter().cloned().fold(0.0_f64, |a, v| a.max(v.abs()));
        for (a, b) in u.iter().zip(&u_oracle) {
            assert!((a - b).abs() < 1e-8 * scale);
        }
        for &d in &bc.fixed_dofs {
            assert_eq!(u[d], 0.0);
        }
    }

    #[test]
    fn compliance_is_quadratic_in_load() {
        let mesh = build_mesh(2, 2, 2).unwrap();
        let ke = build_element_stiffness(0.3).unwrap();
        let mat = MaterialModel::default();
        let rho = DensityField::uniform(mesh.n_elements(), 0.5);
        let k = assemble_global(&mesh, &ke, &rho, &mat).unwrap();
        let top = mesh.node_id(1, 1, 2);

        let bc1 = bottom_fixed_bc(&mesh, vec![(3 * top + 2, -1.0)]);
        let u1 = solve_displacements(&k, &bc1, &SolverConfig::default()).unwrap();
        let c1 = compliance(&u1, &bc1.loads);

        let bc2 = bottom_fixed_bc(&mesh, vec![(3 * top + 2, -2.0)]);
        let u2 = solve_displacements(&k, &bc2, &SolverConfig::default()).unwrap();
        let c2 = compliance(&u2, &bc2.loads);

        assert!(c1 > 0.0);
        assert!((c2 / c1 - 4.0).abs() < 1e-6);
    }

    #[test]
    fn energy_identity() {
        let mesh = build_mesh(2, 2, 2).unwrap();
        let ke = build_element_stiffness(0.3).unwrap();
        let mat = MaterialModel::default();
        let rho = DensityField::uniform(mesh.n_elements(), 0.5);
        let k = assemble_global(&mesh, &ke, &rho, &mat).unwrap();
        let top = mesh.node_id(2, 2, 2);
        let bc = bottom_fixed_bc(&mesh, vec![(3 * top + 2, -1.0), (3 * top, 0.5)]);
        let u = solve_displacements(&k, &bc, &SolverConfig::default()).unwrap();
        let c = compliance(&u, &bc.loads);

        let mut energy = 0.0;
        for (e, edof) in mesh.edof_map.iter().enumerate() {
            let ue: Vec<f64> = edof.iter().map(|&d| u[d]).collect();
            let mut q = 0.0;
            for i in 0..24 {
                for j in 0..24 {
                    q += ue[i] * ke.ke[i][j] * ue[j];
                }
            }
            energy += mat.modulus(rho.rho[e]) * q;
        }
        assert!(((c - energy) / c).abs() < 1e-8);
    }

    #[test]
    fn unconstrained_system_reports_insufficient_constraints() {
        let mesh = build_mesh(1, 1, 1).unwrap();
        let ke = build_element_stiffness(0.3).unwrap();
        let mat = MaterialModel::default();
        let rho = DensityField::uniform(1, 1.0);
        let k = assemble_global(&mesh, &ke, &rho, &mat).unwrap();
        let bc = BoundarySetup::new(vec![0], vec![(23, 1.0)]);
        let cfg = SolverConfig {
            backend: SolverBackend::Direct,
            ..Default::default()
        };
        match solve_displacements(&k, &bc, &cfg) {
            Err(TopoError::InsufficientConstraints(_)) => {}
            other => panic!("expected InsufficientConstraints, got {other:?}"),
        }
    }

    // Adding material never increases compliance.
    #[test]
    fn compliance_monotone_in_density() {
        let mesh = build_mesh(2, 1, 1).unwrap();
        let ke = build_element_stiffness(0.3).unwrap();
        let mat = MaterialModel::default();
        let top = mesh.node_id(2, 1, 1);
        let bc = {
            let mut fixed = Vec::new();
            for iy in 0..=mesh.nely {
                for iz in 0..=mesh.nelz {
                    let n = mesh.node_id(0, iy, iz);
                    fixed.extend([3 * n, 3 * n + 1, 3 * n + 2]);
                }
            }
            BoundarySetup::new(fixed, vec![(3 * top + 2, -1.0)])
        };
        let cfg = SolverConfig {
            backend: SolverBackend::Direct,
            ..Default::default()
        };
        let mut rho = DensityField::uniform(2, 0.4);
        let k = assemble_global(&mesh, &ke, &rho, &mat).unwrap();
        let u = solve_displacements(&k, &bc, &cfg).unwrap();
        let c_before = compliance(&u, &bc.loads);

        rho.rho[1] = 0.8;
        let k = assemble_global(&mesh, &ke, &rho, &mat).unwrap();
        let u = solve_displacements(&k, &bc, &cfg).unwrap();
        let c_after = compliance(&u, &bc.loads);
        assert!(c_after <= c_before);
    }
}
