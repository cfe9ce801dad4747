//! Linear solvers for the reduced (free-DOF) stiffness system.
//!
//! Two backends behind one config:
//! - `Cg`: Jacobi-preconditioned conjugate gradient, the default. Supports
//!   warm starts from the previous optimization iteration.
//! - `Direct`: banded Cholesky factorization after a reverse Cuthill-McKee
//!   reordering. Exact up to rounding; used for cross-checks and small runs.

use crate::error::{Result, TopoError};
use crate::fem::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverBackend {
    Cg,
    Direct,
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SolverConfig {
    pub backend: SolverBackend,
    /// Relative residual target, two-norm against the load vector.
    pub rel_tol: f64,
    /// Iteration cap; `None` means 10 * n_free.
    pub max_iterations: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: SolverBackend::Cg,
            rel_tol: 1e-8,
            max_iterations: None,
        }
    }
}

/// Outcome of a reduced solve, with iteration count for diagnostics.
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
}

/// Solves K x = b for SPD `k`, optionally warm-started from `guess`.
pub fn solve_reduced(
    k: &CsrMatrix,
    b: &[f64],
    cfg: &SolverConfig,
    guess: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveStats)> {
    match cfg.backend {
        SolverBackend::Cg => cg_jacobi(k, b, cfg, guess),
        SolverBackend::Direct => {
            let x = banded_cholesky_solve(k, b)?;
            Ok((
                x,
                SolveStats {
                    iterations: 1,
                    residual: 0.0,
                },
            ))
        }
    }
}

fn cg_jacobi(
    k: &CsrMatrix,
    b: &[f64],
    cfg: &SolverConfig,
    guess: Option<&[f64]>,
) -> Result<(Vec<f64>, SolveStats)> {
    let n = k.n_rows;
    debug_assert_eq!(b.len(), n);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                residual: 0.0,
            },
        ));
    }
    let max_iter = cfg.max_iterations.unwrap_or(10 * n);
    let tol = cfg.rel_tol * b_norm;

    let inv_diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = k.get(i, i);
            if d <= 0.0 {
                0.0
            } else {
                1.0 / d
            }
        })
        .collect();
    if inv_diag.contains(&0.0) {
        return Err(TopoError::SingularSystem {
            iterations: 0,
            residual: f64::INFINITY,
        });
    }

    let mut x = match guess {
        Some(g) => g.to_vec(),
        None => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    k.mul_vec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(&r, &d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    let mut res = norm(&r);
    for it in 0..max_iter {
        if res <= tol {
            return Ok((
                x,
                SolveStats {
                    iterations: it,
                    residual: res / b_norm,
                },
            ));
        }
        k.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(TopoError::SingularSystem {
                iterations: it,
                residual: res / b_norm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = norm(&r);
    }
    if res <= tol {
        Ok((
            x,
            SolveStats {
                iterations: max_iter,
                residual: res / b_norm,
            },
        ))
    } else {
        Err(TopoError::SingularSystem {
            iterations: max_iter,
            residual: res / b_norm,
        })
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`.
fn rcm_ordering(k: &CsrMatrix) -> Vec<usize> {
    let n = k.n_rows;
    let degree: Vec<usize> = (0..n).map(|i| k.row_ptr[i + 1] - k.row_ptr[i]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = std::collections::VecDeque::new();
    let mut neighbors: Vec<usize> = Vec::new();

    // Process every connected component, seeding each from its minimum-degree
    // node (a cheap pseudo-peripheral choice that works well on grids).
    let mut nodes_by_degree: Vec<usize> = (0..n).collect();
    nodes_by_degree.sort_by_key(|&i| degree[i]);
    for &seed in &nodes_by_degree {
        if visited[seed] {
            continue;
        }
        visited[seed] = true;
        queue.push_back(seed);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            neighbors.clear();
            let (cols, _) = k.row(u);
            for &c in cols {
                let v = c as usize;
                if !visited[v] {
                    visited[v] = true;
                    neighbors.push(v);
                }
            }
            neighbors.sort_by_key(|&v| degree[v]);
            for &v in &neighbors {
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Direct solve via banded Cholesky on the RCM-permuted matrix.
fn banded_cholesky_solve(k: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = k.n_rows;
    if n == 0 {
        return Ok(Vec::new());
    }
    let perm = rcm_ordering(k); // perm[new] = old
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }

    let mut bw = 0usize;
    for i in 0..n {
        let (cols, _) = k.row(i);
        for &c in cols {
            let (a, bn) = (inv[i], inv[c as usize]);
            bw = bw.max(a.abs_diff(bn));
        }
    }

    // Lower band, row-major: row i holds columns i-bw ..= i.
    let w = bw + 1;
    let mut band = vec![0.0f64; n * w];
    for i in 0..n {
        let (cols, vals) = k.row(i);
        let pi = inv[i];
        for (&c, &v) in cols.iter().zip(vals) {
            let pj = inv[c as usize];
            if pj <= pi {
                band[pi * w + (pj + bw - pi)] = v;
            }
        }
    }

    // In-place Cholesky within the band.
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        for j in lo..=i {
            let kmin = j.saturating_sub(bw).max(lo);
            let mut s = band[i * w + (j + bw - i)];
            for m in kmin..j {
                s -= band[i * w + (m + bw - i)] * band[j * w + (m + bw - j)];
            }
            if j < i {
                band[i * w + (j + bw - i)] = s / band[j * w + bw];
            } else {
                if s <= 0.0 {
                    return Err(TopoError::InsufficientConstraints(format!(
                        "non-positive pivot {s:.3e} at row {i} during factorization"
                    )));
                }
                band[i * w + bw] = s.sqrt();
            }
        }
    }

    // Forward substitution L y = P b.
    let mut y = vec![0.0; n];
    for i in 0..n {
        let lo = i.saturating_sub(bw);
        let mut s = b[perm[i]];
        for j in lo..i {
            s -= band[i * w + (j + bw - i)] * y[j];
        }
        y[i] = s / band[i * w + bw];
    }
    // Back substitution L^T x = y.
    let mut xp = vec![0.0; n];
    for i in (0..n).rev() {
        let hi = (i + bw).min(n - 1);
        let mut s = y[i];
        for j in (i + 1)..=hi {
            s -= band[j * w + (i + bw - j)] * xp[j];
        }
        xp[i] = s / band[i * w + bw];
    }

    let mut x = vec![0.0; n];
    for i in 0..n {
        x[perm[i]] = xp[i];
    }
    Ok(x)
}
