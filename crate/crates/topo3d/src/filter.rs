//! Sensitivity filtering over element centroids.
//!
//! The filter operator holds weights h_ij = max(0, rmin - dist(c_i, c_j))
//! for centroid pairs strictly closer than rmin, stored sparse. Neighbor
//! pairs are found with a kd-tree over the centroids, so construction is
//! O(N log N) instead of the all-pairs O(N^2). Row sums normalize the
//! weighted averages so a constant field passes through unchanged.

use crate::error::{Result, TopoError};
use crate::fem::sparse::CsrMatrix;
use crate::mesh::GridMesh;
use crate::optimizer::DensityField;

/// Floor applied to the density divisor in density-weighted mode.
const DENSITY_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterMode {
    /// Row-normalized weighted average of the raw sensitivities.
    Plain,
    /// Classical sensitivity filter: weights also carry the neighbor
    /// densities, divisor includes max(rho_i, 1e-3).
    DensityWeighted,
}

/// Sparse linear-decay filter weights plus row sums.
#[derive(Debug, Clone)]
pub struct FilterOperator {
    pub h: CsrMatrix,
    pub hs: Vec<f64>,
    pub rmin: f64,
}

/// Builds the filter operator for a mesh via kd-tree radius queries.
pub fn build_filter(mesh: &GridMesh, rmin: f64) -> Result<FilterOperator> {
    if !(rmin > 0.0) {
        return Err(TopoError::InvalidConfig(format!(
            "filter radius must be positive, got {rmin}"
        )));
    }
    let centroids = mesh.element_centroids();
    let tree = KdTree::build(&centroids);
    let n = centroids.len();

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx: Vec<u32> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    let mut hs = Vec::with_capacity(n);
    let mut hits: Vec<(u32, f64)> = Vec::new();
    row_ptr.push(0);
    for c in &centroids {
        hits.clear();
        tree.within_radius(&centroids, c, rmin, &mut hits);
        hits.sort_unstable_by_key(|&(j, _)| j);
        let mut row_sum = 0.0;
        for &(j, d) in &hits {
            let w = rmin - d;
            col_idx.push(j);
            values.push(w);
            row_sum += w;
        }
        hs.push(row_sum);
        row_ptr.push(col_idx.len());
    }

    Ok(FilterOperator {
        h: CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr,
            col_idx,
            values,
        },
        hs,
        rmin,
    })
}

/// Applies the sensitivity filter.
pub fn apply_sensitivity_filter(
    op: &FilterOperator,
    rho: &DensityField,
    dc: &[f64],
    mode: FilterMode,
) -> Result<Vec<f64>> {
    let n = op.h.n_rows;
    if dc.len() != n || rho.rho.len() != n {
        return Err(TopoError::DimensionMismatch {
            expected: n,
            got: dc.len(),
        });
    }
    let mut out = vec![0.0; n];
    match mode {
        FilterMode::Plain => {
            for i in 0..n {
                let (cols, vals) = op.h.row(i);
                let mut s = 0.0;
                for (&j, &w) in cols.iter().zip(vals) {
                    s += w * dc[j as usize];
                }
                out[i] = s / op.hs[i];
            }
        }
        FilterMode::DensityWeighted => {
            for i in 0..n {
                let (cols, vals) = op.h.row(i);
                let mut s = 0.0;
                for (&j, &w) in cols.iter().zip(vals) {
                    let j = j as usize;
                    s += w * rho.rho[j] * dc[j];
                }
                out[i] = s / (op.hs[i] * rho.rho[i].max(DENSITY_FLOOR));
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// kd-tree over 3D points, fixed-radius queries only.

struct KdNode {
    axis: u8,
    split: f64,
    left: usize,
    right: usize,
    /// Leaf payload: range into `indices`.
    range: Option<(usize, usize)>,
}

struct KdTree {
    nodes: Vec<KdNode>,
    indices: Vec<u32>,
    root: usize,
}

const LEAF_SIZE: usize = 16;

impl KdTree {
    fn build(points: &[[f64; 3]]) -> KdTree {
        let mut indices: Vec<u32> = (0..points.len() as u32).collect();
        let mut tree = KdTree {
            nodes: Vec::new(),
            indices: Vec::new(),
            root: 0,
        };
        let n = indices.len();
        tree.root = tree.build_rec(points, &mut indices, 0, n);
        tree.indices = indices;
        tree
    }

    fn build_rec(&mut self, points: &[[f64; 3]], indices: &mut [u32], lo: usize, hi: usize) -> usize {
        let slice = &mut indices[lo..hi];
        if slice.len() <= LEAF_SIZE {
            self.nodes.push(KdNode {
                axis: 0,
                split: 0.0,
                left: usize::MAX,
                right: usize::MAX,
                range: Some((lo, hi)),
            });
            return self.nodes.len() - 1;
        }
        // Widest-extent axis, median split.
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for &i in slice.iter() {
            let p = points[i as usize];
            for a in 0..3 {
                min[a] = min[a].min(p[a]);
                max[a] = max[a].max(p[a]);
            }
        }
        let axis = (0..3)
            .max_by(|&a, &b| {
                (max[a] - min[a])
                    .partial_cmp(&(max[b] - min[b]))
                    .unwrap()
            })
            .unwrap();
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |&a, &b| {
            points[a as usize][axis]
                .partial_cmp(&points[b as usize][axis])
                .unwrap()
                .then(a.cmp(&b))
        });
        let split = points[slice[mid] as usize][axis];
        let node_idx = self.nodes.len();
        self.nodes.push(KdNode {
            axis: axis as u8,
            split,
            left: usize::MAX,
            right: usize::MAX,
            range: None,
        });
        let left = self.build_rec(points, indices, lo, lo + mid);
        let right = self.build_rec(points, indices, lo + mid, hi);
        self.nodes[node_idx].left = left;
        self.nodes[node_idx].right = right;
        node_idx
    }

    /// Collects (index, distance) for points with distance strictly < radius.
    fn within_radius(
        &self,
        points: &[[f64; 3]],
        query: &[f64; 3],
        radius: f64,
        out: &mut Vec<(u32, f64)>,
    ) {
        let mut stack = vec![self.root];
        let r2 = radius * radius;
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if let Some((lo, hi)) = node.range {
                for &i in &self.indices[lo..hi] {
                    let p = points[i as usize];
                    let d2 = (p[0] - query[0]).powi(2)
                        + (p[1] - query[1]).powi(2)
                        + (p[2] - query[2]).powi(2);
                    if d2 < r2 {
                        out.push((i, d2.sqrt()));
                    }
                }
                continue;
            }
            let delta = query[node.axis as usize] - node.split;
            // Points equal to the split value live in the right subtree.
            if delta < radius {
                stack.push(node.left);
            }
            if -delta <= radius {
                stack.push(node.right);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;

    /// All-pairs O(N^2) construction, the oracle for the kd-tree path.
    fn brute_force_filter(mesh: &GridMesh, rmin: f64) -> FilterOperator {
        let centroids = mesh.element_centroids();
        let n = centroids.len();
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut hs = Vec::new();
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let d = (0..3)
                    .map(|a| (centroids[i][a] - centroids[j][a]).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if d < rmin {
                    col_idx.push(j as u32);
                    values.push(rmin - d);
                    sum += rmin - d;
                }
            }
            hs.push(sum);
            row_ptr.push(col_idx.len());
        }
        FilterOperator {
            h: CsrMatrix {
                n_rows: n,
                n_cols: n,
                row_ptr,
                col_idx,
                values,
            },
            hs,
            rmin,
        }
    }

    fn assert_same_operator(a: &FilterOperator, b: &FilterOperator) {
        assert_eq!(a.h.row_ptr, b.h.row_ptr);
        assert_eq!(a.h.col_idx, b.h.col_idx);
        assert_eq!(a.h.values, b.h.values);
        assert_eq!(a.hs, b.hs);
    }

    #[test]
    fn unit_radius_is_identity() {
        let mesh = build_mesh(3, 2, 2).unwrap();
        let op = build_filter(&mesh, 1.0).unwrap();
        assert_eq!(op.h.nnz(), mesh.n_elements());
        for i in 0..mesh.n_elements() {
            assert_eq!(op.h.get(i, i), 1.0);
            assert_eq!(op.hs[i], 1.0);
        }
        let rho = DensityField::uniform(mesh.n_elements(), 0.5);
        let dc: Vec<f64> = (0..mesh.n_elements()).map(|i| -(i as f64) - 1.0).collect();
        for mode in [FilterMode::Plain, FilterMode::DensityWeighted] {
            let f = apply_sensitivity_filter(&op, &rho, &dc, mode).unwrap();
            for (a, b) in f.iter().zip(&dc) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_brute_force_small() {
        let mesh = build_mesh(3, 3, 3).unwrap();
        let fast = build_filter(&mesh, 1.5).unwrap();
        let brute = brute_force_filter(&mesh, 1.5);
        assert_same_operator(&fast, &brute);
    }

    #[test]
    fn matches_brute_force_various_radii() {
        for (dims, rmin) in [((4, 2, 3), 2.0), ((5, 5, 4), 2.5), ((2, 2, 2), 10.0)] {
            let mesh = build_mesh(dims.0, dims.1, dims.2).unwrap();
            let fast = build_filter(&mesh, rmin).unwrap();
            let brute = brute_force_filter(&mesh, rmin);
            assert_same_operator(&fast, &brute);
        }
    }

    #[test]
    fn symmetric_weights_and_diagonal() {
        let mesh = build_mesh(4, 3, 2).unwrap();
        let rmin = 2.2;
        let op = build_filter(&mesh, rmin).unwrap();
        for i in 0..mesh.n_elements() {
            assert_eq!(op.h.get(i, i), rmin);
            assert!(op.hs[i] > 0.0);
            let (cols, vals) = op.h.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                assert_eq!(op.h.get(j as usize, i), w);
            }
        }
    }

    #[test]
    fn plain_mode_preserves_constants() {
        let mesh = build_mesh(4, 4, 3).unwrap();
        let op = build_filter(&mesh, 2.5).unwrap();
        let rho = DensityField::uniform(mesh.n_elements(), 0.3);
        let dc = vec![-7.5; mesh.n_elements()];
        let f = apply_sensitivity_filter(&op, &rho, &dc, FilterMode::Plain).unwrap();
        for v in f {
            assert!((v - -7.5).abs() < 1e-12);
        }
    }

    #[test]
    fn application_matches_dense_oracle() {
        let mesh = build_mesh(4, 2, 2).unwrap();
        let n = mesh.n_elements();
        let op = build_filter(&mesh, 1.5).unwrap();
        let mut rho = DensityField::uniform(n, 0.5);
        let mut dc = vec![0.0; n];
        // Deterministic pseudo-random inputs.
        for i in 0..n {
            dc[i] = -((i * 2654435761 % 1000) as f64) / 1000.0 - 0.1;
            rho.rho[i] = ((i * 40503 % 997) as f64) / 997.0;
        }
        let dense = op.h.to_dense();
        for mode in [FilterMode::Plain, FilterMode::DensityWeighted] {
            let got = apply_sensitivity_filter(&op, &rho, &dc, mode).unwrap();
            for i in 0..n {
                let expected = match mode {
                    FilterMode::Plain => {
                        (0..n).map(|j| dense[i][j] * dc[j]).sum::<f64>() / op.hs[i]
                    }
                    FilterMode::DensityWeighted => {
                        (0..n)
                            .map(|j| dense[i][j] * rho.rho[j] * dc[j])
                            .sum::<f64>()
                            / (op.hs[i] * rho.rho[i].max(1e-3))
                    }
                };
                assert!((got[i] - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let mesh = build_mesh(2, 2, 2).unwrap();
        assert!(build_filter(&mesh, 0.0).is_err());
        let op = build_filter(&mesh, 1.5).unwrap();
        let rho = DensityField::uniform(8, 0.5);
        assert!(apply_sensitivity_filter(&op, &rho, &[1.0; 3], FilterMode::Plain).is_err());
    }
}
