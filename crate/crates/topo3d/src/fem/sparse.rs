//! Compressed-sparse-row storage and triplet-based global assembly.
//!
//! The sparsity pattern of the global stiffness never changes during an
//! optimization run, so [`GlobalAssembler`] builds the CSR pattern once and
//! precomputes, for every triplet in the mesh's flattened index streams, the
//! destination slot in the value array. Re-assembly is then a single scaled
//! scatter-add pass.

use crate::error::{Result, TopoError};
use crate::fem::element::ElementStiffness;
use crate::fem::MaterialModel;
use crate::mesh::GridMesh;
use crate::optimizer::DensityField;

/// Square CSR matrix. Used for the global stiffness (symmetric, both
/// triangles stored) and the filter operator.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row(&self, i: usize) -> (&[u32], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    /// y = A x
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for i in 0..self.n_rows {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k] as usize];
            }
            y[i] = s;
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&(j as u32)) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n_cols]; self.n_rows];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m[i][j as usize] = v;
            }
        }
        m
    }

    /// Extracts the square submatrix on `keep` (sorted, strictly increasing).
    pub fn submatrix(&self, keep: &[usize]) -> CsrMatrix {
        let mut map = vec![u32::MAX; self.n_cols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new as u32;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &old_row in keep {
            let (cols, vals) = self.row(old_row);
            for (&j, &v) in cols.iter().zip(vals) {
                let nj = map[j as usize];
                if nj != u32::MAX {
                    col_idx.push(nj);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n_rows: keep.len(),
            n_cols: keep.len(),
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Pattern-reusing assembler for the global stiffness matrix.
pub struct GlobalAssembler {
    n_dofs: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    /// For triplet k, the slot in `values` it accumulates into.
    triplet_slot: Vec<u32>,
    n_elements: usize,
}

impl GlobalAssembler {
    pub fn new(mesh: &GridMesh) -> Self {
        let n_dofs = mesh.n_dofs;
        let n_trip = mesh.assembly_rows.len();

        // Counting sort of triplets by row.
        let mut counts = vec![0usize; n_dofs + 1];
        for &r in &mesh.assembly_rows {
            counts[r as usize + 1] += 1;
        }
        for i in 0..n_dofs {
            counts[i + 1] += counts[i];
        }
        let row_start = counts.clone();
        let mut by_row = vec![0u32; n_trip];
        for (k, &r) in mesh.assembly_rows.iter().enumerate() {
            by_row[counts[r as usize]] = k as u32;
            counts[r as usize] += 1;
        }

        // Unique sorted columns per row.
        let mut row_ptr = vec![0usize; n_dofs + 1];
        let mut col_idx = Vec::new();
        let mut scratch: Vec<u32> = Vec::new();
        for i in 0..n_dofs {
            scratch.clear();
            for &k in &by_row[row_start[i]..row_start[i + 1]] {
                scratch.push(mesh.assembly_cols[k as usize]);
            }
            scratch.sort_unstable();
            scratch.dedup();
            col_idx.extend_from_slice(&scratch);
            row_ptr[i + 1] = col_idx.len();
        }

        // Destination slot per triplet.
        let mut triplet_slot = vec![0u32; n_trip];
        for (k, (&r, &c)) in mesh
            .assembly_rows
            .iter()
            .zip(mesh.assembly_cols.iter())
            .enumerate()
        {
            let cols = &col_idx[row_ptr[r as usize]..row_ptr[r as usize + 1]];
            let off = cols.binary_search(&c).expect("column present in pattern");
            triplet_slot[k] = (row_ptr[r as usize] + off) as u32;
        }

        GlobalAssembler {
            n_dofs,
            row_ptr,
            col_idx,
            triplet_slot,
            n_elements: mesh.n_elements(),
        }
    }

    /// SIMP modulus per element: emin + rho^p (e0 - emin).
    pub fn element_moduli(rho: &DensityField, mat: &MaterialModel) -> Vec<f64> {
        rho.rho
            .iter()
            .map(|&r| mat.emin + r.powf(mat.penal) * (mat.e0 - mat.emin))
            .collect()
    }

    /// Assembles K = sum_e E_e(rho_e) * scatter(ke) into `out`, reusing its
    /// allocation when the pattern matches.
    pub fn assemble_into(
        &self,
        ke: &ElementStiffness,
        rho: &DensityField,
        mat: &MaterialModel,
        out: &mut CsrMatrix,
    ) -> Result<()> {
        if rho.rho.len() != self.n_elements {
            return Err(TopoError::DimensionMismatch {
                expected: self.n_elements,
                got: rho.rho.len(),
            });
        }
        if out.values.len() != self.col_idx.len() {
            *out = CsrMatrix {
                n_rows: self.n_dofs,
                n_cols: self.n_dofs,
                row_ptr: self.row_ptr.clone(),
                col_idx: self.col_idx.clone(),
                values: vec![0.0; self.col_idx.len()],
            };
        } else {
            out.values.iter_mut().for_each(|v| *v = 0.0);
        }
        let ke_flat = ke.flattened();
        let moduli = Self::element_moduli(rho, mat);
        let values = &mut out.values;
        for (e, &scale) in moduli.iter().enumerate() {
            let base = e * 576;
            let slots = &self.triplet_slot[base..base + 576];
            for (s, &kv) in slots.iter().zip(ke_flat.iter()) {
                values[*s as usize] += scale * kv;
            }
        }
        Ok(())
    }

    pub fn assemble(
        &self,
        ke: &ElementStiffness,
        rho: &DensityField,
        mat: &MaterialModel,
    ) -> Result<CsrMatrix> {
        let mut out = CsrMatrix {
            n_rows: 0,
            n_cols: 0,
            row_ptr: vec![0],
            col_idx: Vec::new(),
            values: Vec::new(),
        };
        self.assemble_into(ke, rho, mat, &mut out)?;
        Ok(out)
    }
}

/// One-shot global assembly (full matrix, before boundary conditions).
pub fn assemble_global(
    mesh: &GridMesh,
    ke: &ElementStiffness,
    rho: &DensityField,
    mat: &MaterialModel,
) -> Result<CsrMatrix> {
    GlobalAssembler::new(mesh).assemble(ke, rho, mat)
}
