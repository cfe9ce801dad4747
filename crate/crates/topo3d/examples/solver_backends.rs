//! Compares the two linear solver backends on one FE solve: Jacobi
//! preconditioned conjugate gradients (default) against the banded Cholesky
//! direct factorization.
//!
//!     cargo run --release --example solver_backends

use std::time::Instant;

use topo3d::fem::{
    assemble_global, build_element_stiffness, compliance, solve_displacements, MaterialModel,
    SolverBackend, SolverConfig,
};
use topo3d::mesh::build_mesh;
use topo3d::optimizer::DensityField;
use topo3d::problem::default_cantilever;

fn main() {
    let mesh = build_mesh(16, 8, 8).unwrap();
    let ke = build_element_stiffness(0.3).unwrap();
    let mat = MaterialModel::default();
    let rho = DensityField::uniform(mesh.n_elements(), 0.4);
    let k = assemble_global(&mesh, &ke, &rho, &mat).unwrap();
    let bc = default_cantilever(&mesh);

    for backend in [SolverBackend::Cg, SolverBackend::Direct] {
        let cfg = SolverConfig {
            backend,
            ..Default::default()
        };
        let t = Instant::now();
        let u = solve_displacements(&k, &bc, &cfg).unwrap();
        println!(
            "{backend:?}: compliance {:.10e} in {:.3} s",
            compliance(&u, &bc.loads),
            t.elapsed().as_secs_f64()
        );
    }
}
