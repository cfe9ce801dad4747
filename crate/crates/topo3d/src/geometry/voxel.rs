//! Centroid-membership voxelization of triangle meshes.
//!
//! An element is occupied iff its centroid lies inside the solid, decided by
//! ray-parity counting along +x. All centroids sharing a (y, z) lattice line
//! reuse one ray. Rays that graze a vertex or edge are re-cast with a small
//! deterministic offset so the parity stays well defined.

use crate::error::{Result, TopoError};
use crate::geometry::stl::TriangleMesh;

#[derive(Debug, Clone)]
pub struct VoxelGrid {
    pub nelx: usize,
    pub nely: usize,
    pub nelz: usize,
    /// Element-id order occupancy (same convention as [`crate::mesh`]).
    pub occupied: Vec<bool>,
}

impl VoxelGrid {
    pub fn is_occupied(&self, ex: usize, ey: usize, ez: usize) -> bool {
        self.occupied[ez * self.nelx * self.nely + ex * self.nely + ey]
    }

    pub fn count_occupied(&self) -> usize {
        self.occupied.iter().filter(|&&o| o).count()
    }
}

/// Voxelizes the mesh over its own bounding box.
pub fn voxelize(mesh: &TriangleMesh, dims: (usize, usize, usize)) -> Result<VoxelGrid> {
    let (min, max) = mesh.bounds();
    voxelize_with_bounds(mesh, dims, min, max)
}

/// Voxelizes the mesh over an explicit axis-aligned box.
pub fn voxelize_with_bounds(
    mesh: &TriangleMesh,
    dims: (usize, usize, usize),
    min: [f64; 3],
    max: [f64; 3],
) -> Result<VoxelGrid> {
    let (nelx, nely, nelz) = dims;
    if nelx == 0 || nely == 0 || nelz == 0 {
        return Err(TopoError::InvalidDimensions {
            nelx: nelx as i64,
            nely: nely as i64,
            nelz: nelz as i64,
        });
    }
    for axis in 0..3 {
        if !(max[axis] - min[axis] > 0.0) {
            return Err(TopoError::DegenerateBounds { axis });
        }
    }
    let size = [
        (max[0] - min[0]) / nelx as f64,
        (max[1] - min[1]) / nely as f64,
        (max[2] - min[2]) / nelz as f64,
    ];
    let offset_step = 1e-7 * size.iter().cloned().fold(f64::INFINITY, f64::min);

    let mut occupied = vec![false; nelx * nely * nelz];
    let mut crossings: Vec<f64> = Vec::new();
    for ez in 0..nelz {
        for ey in 0..nely {
            let cy = min[1] + (ey as f64 + 0.5) * size[1];
            let cz = min[2] + (ez as f64 + 0.5) * size[2];

            // Re-cast with growing offsets until no triangle is grazed.
            let mut attempts = 0;
            loop {
                // Incommensurate multipliers keep the perturbed ray off any
                // straight edge the unperturbed one grazed.
                let off = attempts as f64 * offset_step;
                match collect_crossings(mesh, cy + off, cz + 0.618_033_988_749 * off, &mut crossings) {
                    Ok(()) => break,
                    Err(Graze) if attempts < 32 => attempts += 1,
                    Err(Graze) => {
                        log::warn!(
                            "ray (y={cy}, z={cz}) still grazes geometry after 32 offsets; \
                             using the last attempt"
                        );
                        break;
                    }
                }
            }
            crossings.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());

            for ex in 0..nelx {
                let cx = min[0] + (ex as f64 + 0.5) * size[0];
                // Inside iff an odd number of surface crossings lie ahead.
                let ahead = crossings.len() - crossings.partition_point(|&x| x <= cx);
                if ahead % 2 == 1 {
                    occupied[ez * nelx * nely + ex * nely + ey] = true;
                }
            }
        }
    }
    Ok(VoxelGrid {
        nelx,
        nely,
        nelz,
        occupied,
    })
}

struct Graze;

/// Intersects the +x ray through (y, z) with every triangle, pushing the
/// crossing x coordinates. Signals `Graze` when the ray passes within
/// relative epsilon of a triangle boundary.
fn collect_crossings(
    mesh: &TriangleMesh,
    y: f64,
    z: f64,
    out: &mut Vec<f64>,
) -> std::result::Result<(), Graze> {
    const REL_EPS: f64 = 1e-9;
    out.clear();
    for t in &mesh.triangles {
        let a = [t.vertices[0][1] as f64, t.vertices[0][2] as f64];
        let b = [t.vertices[1][1] as f64, t.vertices[1][2] as f64];
        let c = [t.vertices[2][1] as f64, t.vertices[2][2] as f64];
        let area2 = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        let scale = (b[0] - a[0]).abs().max((b[1] - a[1]).abs())
            + (c[0] - a[0]).abs().max((c[1] - a[1]).abs());
        if area2.abs() <= REL_EPS * scale * scale {
            // Projection degenerate: triangle parallel to the ray.
            continue;
        }
        let p = [y, z];
        let w0 = (b[0] - p[0]) * (c[1] - p[1]) - (b[1] - p[1]) * (c[0] - p[0]);
        let w1 = (c[0] - p[0]) * (a[1] - p[1]) - (c[1] - p[1]) * (a[0] - p[0]);
        let w2 = (a[0] - p[0]) * (b[1] - p[1]) - (a[1] - p[1]) * (b[0] - p[0]);
        let (u, v, w) = (w0 / area2, w1 / area2, w2 / area2);
        // Barycentrics sum to one, so an absolute epsilon is already relative.
        let m = u.min(v).min(w);
        if m.abs() < REL_EPS {
            return Err(Graze);
        }
        if m > 0.0 {
            let x = u * t.vertices[0][0] as f64
                + v * t.vertices[1][0] as f64
                + w * t.vertices[2][0] as f64;
            out.push(x);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::stl::{parse_stl, unit_cube_mesh, write_binary_stl, Triangle};

    #[test]
    fn cube_spanning_grid_fills_everything() {
        let mesh = unit_cube_mesh();
        let grid = voxelize(&mesh, (4, 3, 2)).unwrap();
        assert_eq!(grid.count_occupied(), 24);
    }

    #[test]
    fn half_cube_fills_half_the_grid() {
        // Closed box over x in [0, 0.5], plus a zero-area triangle at x = 1
        // so the mesh bounding box spans the full unit cube.
        let mut rho = crate::optimizer::DensityField::uniform(2, 0.0);
        rho.rho[0] = 1.0;
        let bytes = crate::geometry::stl::export_stl(&rho, (2, 1, 1), 0.5).unwrap();
        let mut tris = parse_stl(&bytes).unwrap().triangles;
        // export is in element units: box spans x in [0,1] of a 2-wide grid;
        // rescale to [0, 0.5] of a unit cube.
        for t in &mut tris {
            for v in &mut t.vertices {
                v[0] *= 0.5;
            }
        }
        tris.push(Triangle {
            normal: [1.0, 0.0, 0.0],
            vertices: [[1.0, 0.3, 0.3], [1.0, 0.3, 0.3], [1.0, 0.6, 0.6]],
        });
        let mesh = parse_stl(&write_binary_stl(&tris)).unwrap();
        let grid = voxelize(&mesh, (8, 8, 8)).unwrap();
        assert_eq!(grid.count_occupied(), 256);
        for ex in 0..8 {
            for ey in 0..8 {
                for ez in 0..8 {
                    assert_eq!(grid.is_occupied(ex, ey, ez), ex < 4);
                }
            }
        }
    }

    /// Latitude/longitude sphere triangulation (watertight).
    pub fn sphere_mesh(center: [f32; 3], radius: f32, stacks: usize, slices: usize) -> TriangleMesh {
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

    #[test]
    fn sphere_volume_within_two_percent() {
        let mesh = sphere_mesh([0.5, 0.5, 0.5], 0.4, 64, 128);
        let grid =
            voxelize_with_bounds(&mesh, (32, 32, 32), [0.0, 0.0, 0.0], [1.0, 1.0, 1.0]).unwrap();
        let expected = 4.0 / 3.0 * std::f64::consts::PI * (0.4f64 * 32.0).powi(3);
        let got = grid.count_occupied() as f64;
        assert!(
            (got - expected).abs() / expected < 0.02,
            "occupied {got}, analytic {expected}"
        );
    }

    #[test]
    fn export_then_revoxelize_recovers_voxel_set() {
        let dims = (4, 3, 3);
        let n = dims.0 * dims.1 * dims.2;
        let mut rho = crate::optimizer::DensityField::uniform(n, 0.0);
        for e in 0..n {
            if e % 3 == 0 || e % 7 == 1 {
                rho.rho[e] = 0.8;
            }
        }
        let bytes = crate::geometry::stl::export_stl(&rho, dims, 0.5).unwrap();
        let mesh = parse_stl(&bytes).unwrap();
        let grid = voxelize_with_bounds(
            &mesh,
            dims,
            [0.0; 3],
            [dims.0 as f64, dims.1 as f64, dims.2 as f64],
        )
        .unwrap();
        for ez in 0..dims.2 {
            for ex in 0..dims.0 {
                for ey in 0..dims.1 {
                    let e = ez * dims.0 * dims.1 + ex * dims.1 + ey;
                    assert_eq!(
                        grid.is_occupied(ex, ey, ez),
                        rho.rho[e] > 0.5,
                        "voxel ({ex},{ey},{ez})"
                    );
                }
            }
        }
    }

    #[test]
    fn determinism() {
        let mesh = sphere_mesh([0.0, 0.0, 0.0], 1.0, 16, 24);
        let a = voxelize(&mesh, (10, 10, 10)).unwrap();
        let b = voxelize(&mesh, (10, 10, 10)).unwrap();
        assert_eq!(a.occupied, b.occupied);
    }

    #[test]
    fn degenerate_bounds_rejected() {
        let tris = vec![Triangle {
            normal: [0.0; 3],
            vertices: [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        }];
        let mesh = TriangleMesh::new(tris).unwrap();
        match voxelize(&mesh, (2, 2, 2)) {
            Err(TopoError::DegenerateBounds { axis: 2 }) => {}
            other => panic!("expected DegenerateBounds, got {other:?}"),
        }
    }
}
