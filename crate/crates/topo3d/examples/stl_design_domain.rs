//! Restricts the design space to a voxelized STL solid. Elements outside the
//! surface become passive voids; the optimizer only places material inside.
//!
//! A sphere is triangulated in memory here; with a file on disk the same flow
//! is `parse_stl(&std::fs::read(path)?)` followed by `voxelize`.
//!
//!     cargo run --release --example stl_design_domain

use topo3d::geometry::{voxelize_with_bounds, Triangle, TriangleMesh};
use topo3d::optimizer::run_optimization;
use topo3d::problem::ProblemDefinition;

fn sphere(center: [f32; 3], radius: f32, stacks: usize, slices: usize) -> TriangleMesh {
    let pt = |i: usize, j: usize| -> [f32; 3] {
        let theta = std::f32::consts::PI * i as f32 / stacks as f32;
        let phi = 2.0 * std::f32::consts::PI * j as f32 / slices as f32;
        [
            center[0] + radius * theta.sin() * phi.cos(),
            center[1] + radius * theta.sin() * phi.sin(),
            center[2] + radius * theta.cos(),
        ]
    };
    let mut tris = Vec::new();
    for i in 0..stacks {
        for j in 0..slices {
            let (j1, i1) = ((j + 1) % slices, i + 1);
            let quad = [pt(i, j), pt(i1, j), pt(i1, j1), pt(i, j1)];
            if i > 0 {
                tris.push(Triangle {
                    normal: [0.0; 3],
                    vertices: [quad[0], quad[1], quad[2]],
                });
            }
            if i1 < stacks {
                tris.push(Triangle {
                    normal: [0.0; 3],
                    vertices: [quad[0], quad[2], quad[3]],
                });
            }
        }
    }
    TriangleMesh::new(tris).unwrap()
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();

    let dims = (24, 12, 12);
    // Sphere in normalized domain coordinates, shifted toward the loaded
    // bottom edge so the fixed face and the load point stay connected while
    // the top corners fall outside the design space.
    let mesh = sphere([0.5, 0.5, 0.4], 0.65, 48, 96);
    let domain = voxelize_with_bounds(&mesh, dims, [0.0; 3], [1.0; 3]).expect("voxelize");
    println!(
        "design domain: {} of {} elements",
        domain.count_occupied(),
        dims.0 * dims.1 * dims.2
    );

    let mut problem = ProblemDefinition::cantilever(dims.0, dims.1, dims.2, 0.3, 3.0, 2.5);
    problem.domain = Some(domain);
    problem.max_iter = 60;

    let (density, trace) = run_optimization(&problem).expect("optimization");
    println!(
        "{} iterations, final compliance {:.6e}, volume {:.4} of the domain",
        trace.iterations.len(),
        trace.iterations.last().unwrap().compliance,
        density.designable_volume_fraction()
    );
}
