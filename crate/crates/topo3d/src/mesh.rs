//! Structured hexahedral grid with precomputed element-to-DOF index maps.
//!
//! Numbering convention (fixed for the whole crate):
//! - node id `n(ix, iy, iz) = iz*(nelx+1)*(nely+1) + ix*(nely+1) + iy`,
//!   i.e. y runs fastest, then x, then z;
//! - node `n` owns DOFs `(3n, 3n+1, 3n+2)` for `(ux, uy, uz)`;
//! - element id `e(ex, ey, ez) = ez*nelx*nely + ex*nely + ey`;
//! - the 8 element nodes are ordered `(ex,ey,ez)`, `(ex+1,ey,ez)`,
//!   `(ex+1,ey+1,ez)`, `(ex,ey+1,ez)`, then the same four at `ez+1`.
//!
//! Elements are unit cubes; all lengths are in element-length units.

use crate::error::{Result, TopoError};

pub const NODES_PER_ELEMENT: usize = 8;
pub const DOFS_PER_ELEMENT: usize = 24;

/// Structured grid of `nelx * nely * nelz` unit-cube H8 elements.
///
/// Immutable after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct GridMesh {
    pub nelx: usize,
    pub nely: usize,
    pub nelz: usize,
    pub n_nodes: usize,
    pub n_dofs: usize,
    /// Per-element list of 24 global DOF indices, element-major.
    pub edof_map: Vec<[usize; DOFS_PER_ELEMENT]>,
    /// Flattened triplet row indices: for element `e` and local pair `(i, j)`
    /// in row-major order, entry `e*576 + i*24 + j` is `edof_map[e][i]`.
    pub assembly_rows: Vec<u32>,
    /// Flattened triplet column indices, same layout with `edof_map[e][j]`.
    pub assembly_cols: Vec<u32>,
}

impl GridMesh {
    pub fn n_elements(&self) -> usize {
        self.nelx * self.nely * self.nelz
    }

    /// Node id for lattice coordinates `(ix, iy, iz)`.
    pub fn node_id(&self, ix: usize, iy: usize, iz: usize) -> usize {
        debug_assert!(ix <= self.nelx && iy <= self.nely && iz <= self.nelz);
        iz * (self.nelx + 1) * (self.nely + 1) + ix * (self.nely + 1) + iy
    }

    /// Element id for lattice coordinates `(ex, ey, ez)`.
    pub fn element_id(&self, ex: usize, ey: usize, ez: usize) -> usize {
        debug_assert!(ex < self.nelx && ey < self.nely && ez < self.nelz);
        ez * self.nelx * self.nely + ex * self.nely + ey
    }

    /// Inverse of [`element_id`](Self::element_id).
    pub fn element_coords(&self, e: usize) -> (usize, usize, usize) {
        let ez = e / (self.nelx * self.nely);
        let rem = e % (self.nelx * self.nely);
        let ex = rem / self.nely;
        let ey = rem % self.nely;
        (ex, ey, ez)
    }

    /// Centroid of every element, in element-length units.
    /// Element `e(ex,ey,ez)` sits at `(ex+0.5, ey+0.5, ez+0.5)`.
    pub fn element_centroids(&self) -> Vec<[f64; 3]> {
        (0..self.n_elements())
            .map(|e| {
                let (ex, ey, ez) = self.element_coords(e);
                [ex as f64 + 0.5, ey as f64 + 0.5, ez as f64 + 0.5]
            })
            .collect()
    }
}

/// Builds the grid and all index maps.
pub fn build_mesh(nelx: usize, nely: usize, nelz: usize) -> Result<GridMesh> {
    if nelx == 0 || nely == 0 || nelz == 0 {
        return Err(TopoError::InvalidDimensions {
            nelx: nelx as i64,
            nely: nely as i64,
            nelz: nelz as i64,
        });
    }
    let n_nodes = (nelx + 1) * (nely + 1) * (nelz + 1);
    let n_dofs = 3 * n_nodes;
    let n_elements = nelx * nely * nelz;

    let node = |ix: usize, iy: usize, iz: usize| iz * (nelx + 1) * (nely + 1) + ix * (nely + 1) + iy;

    let mut edof_map = Vec::with_capacity(n_elements);
    for ez in 0..nelz {
        for ex in 0..nelx {
            for ey in 0..nely {
                let corners = [
                    node(ex, ey, ez),
                    node(ex + 1, ey, ez),
                    node(ex + 1, ey + 1, ez),
                    node(ex, ey + 1, ez),
                    node(ex, ey, ez + 1),
                    node(ex + 1, ey, ez + 1),
                    node(ex + 1, ey + 1, ez + 1),
                    node(ex, ey + 1, ez + 1),
                ];
                let mut edof = [0usize; DOFS_PER_ELEMENT];
                for (k, &n) in corners.iter().enumerate() {
                    edof[3 * k] = 3 * n;
                    edof[3 * k + 1] = 3 * n + 1;
                    edof[3 * k + 2] = 3 * n + 2;
                }
                edof_map.push(edof);
            }
        }
    }
    // Element ids must come out in e(ex,ey,ez) order; the loop nest above
    // pushes ez-major, then ex, then ey, which matches.

    let mut assembly_rows = Vec::with_capacity(n_elements * DOFS_PER_ELEMENT * DOFS_PER_ELEMENT);
    let mut assembly_cols = Vec::with_capacity(n_elements * DOFS_PER_ELEMENT * DOFS_PER_ELEMENT);
    for edof in &edof_map {
        for &row in edof.iter() {
            for &col in edof.iter() {
                assembly_rows.push(row as u32);
                assembly_cols.push(col as u32);
            }
        }
    }

    Ok(GridMesh {
        nelx,
        nely,
        nelz,
        n_nodes,
        n_dofs,
        edof_map,
        assembly_rows,
        assembly_cols,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn rejects_zero_dimensions() {
        assert!(build_mesh(0, 1, 1).is_err());
        assert!(build_mesh(1, 0, 1).is_err());
        assert!(build_mesh(1, 1, 0).is_err());
    }

    #[test]
    fn single_element_counts() {
        let m = build_mesh(1, 1, 1).unwrap();
        assert_eq!(m.n_nodes, 8);
        assert_eq!(m.n_dofs, 24);
        assert_eq!(m.edof_map.len(), 1);
        let dofs: HashSet<usize> = m.edof_map[0].iter().copied().collect();
        assert_eq!(dofs, (0..24).collect());
    }

    #[test]
    fn adjacent_elements_share_twelve_dofs() {
        let m = build_mesh(2, 1, 1).unwrap();
        let a: HashSet<usize> = m.edof_map[0].iter().copied().collect();
        let b: HashSet<usize> = m.edof_map[1].iter().copied().collect();
        assert_eq!(a.intersection(&b).count(), 12);
    }

    #[test]
    fn paper_benchmark_counts() {
        let m = build_mesh(32, 16, 16).unwrap();
        assert_eq!(m.n_elements(), 8192);
        assert_eq!(m.n_nodes, 9537);
        assert_eq!(m.n_dofs, 28611);
    }

    #[test]
    fn numbering_is_bijective() {
        let m = build_mesh(3, 4, 2).unwrap();
        let mut seen = vec![false; m.n_nodes];
        for iz in 0..=m.nelz {
            for ix in 0..=m.nelx {
                for iy in 0..=m.nely {
                    let n = m.node_id(ix, iy, iz);
                    assert!(!seen[n]);
                    seen[n] = true;
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    // Brute-force re-derivation of edof_map straight from the convention.
    #[test]
    fn edof_map_matches_brute_force() {
        let m = build_mesh(4, 3, 2).unwrap();
        for ez in 0..m.nelz {
            for ex in 0..m.nelx {
                for ey in 0..m.nely {
                    let e = ez * m.nelx * m.nely + ex * m.nely + ey;
                    let offsets = [
                        (0, 0, 0),
                        (1, 0, 0),
                        (1, 1, 0),
                        (0, 1, 0),
                        (0, 0, 1),
                        (1, 0, 1),
                        (1, 1, 1),
                        (0, 1, 1),
                    ];
                    for (k, (dx, dy, dz)) in offsets.iter().enumerate() {
                        let n = (ez + dz) * (m.nelx + 1) * (m.nely + 1)
                            + (ex + dx) * (m.nely + 1)
                            + (ey + dy);
                        for c in 0..3 {
                            assert_eq!(m.edof_map[e][3 * k + c], 3 * n + c);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn triplet_streams_follow_row_major_flattening() {
        let m = build_mesh(2, 2, 1).unwrap();
        assert_eq!(m.assembly_rows.len(), 576 * m.n_elements());
        assert_eq!(m.assembly_cols.len(), 576 * m.n_elements());
        for (e, edof) in m.edof_map.iter().enumerate() {
            for i in 0..24 {
                for j in 0..24 {
                    let k = e * 576 + i * 24 + j;
                    assert_eq!(m.assembly_rows[k] as usize, edof[i]);
                    assert_eq!(m.assembly_cols[k] as usize, edof[j]);
                }
            }
        }
    }

    #[test]
    fn all_edofs_in_range_and_distinct() {
        let m = build_mesh(3, 2, 4).unwrap();
        for edof in &m.edof_map {
            let set: HashSet<usize> = edof.iter().copied().collect();
            assert_eq!(set.len(), 24);
            assert!(edof.iter().all(|&d| d < m.n_dofs));
        }
    }

    #[test]
    fn centroids() {
        let m = build_mesh(1, 1, 1).unwrap();
        assert_eq!(m.element_centroids(), vec![[0.5, 0.5, 0.5]]);

        let m = build_mesh(2, 1, 1).unwrap();
        let c = m.element_centroids();
        let d = ((c[0][0] - c[1][0]).powi(2)
            + (c[0][1] - c[1][1]).powi(2)
            + (c[0][2] - c[1][2]).powi(2))
        .sqrt();
        assert_eq!(d, 1.0);

        let m = build_mesh(3, 3, 3).unwrap();
        let center = m.element_id(1, 1, 1);
        assert_eq!(m.element_centroids()[center], [1.5, 1.5, 1.5]);
    }
}
