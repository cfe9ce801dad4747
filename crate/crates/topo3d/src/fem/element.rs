//! H8 element stiffness for a unit cube, unit Young's modulus.
//!
//! Trilinear isoparametric formulation integrated with 2x2x2 Gauss
//! quadrature. The local node order matches [`crate::mesh`]: four nodes of
//! the bottom face counter-clockwise starting at the element origin, then
//! the same four on the top face. DOFs interleave as (ux, uy, uz) per node.

use crate::error::{Result, TopoError};
use crate::mesh::DOFS_PER_ELEMENT;

/// Unit-cube corner offsets in element node order.
pub const NODE_OFFSETS: [[f64; 3]; 8] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [1.0, 1.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 0.0, 1.0],
    [1.0, 1.0, 1.0],
    [0.0, 1.0, 1.0],
];

/// Dense 24x24 stiffness of a solid unit-cube H8 element with E = 1.
#[derive(Debug, Clone)]
pub struct ElementStiffness {
    pub ke: Box<[[f64; DOFS_PER_ELEMENT]; DOFS_PER_ELEMENT]>,
}

impl ElementStiffness {
    /// Row-major flattened copy, the layout the triplet streams assume.
    pub fn flattened(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(DOFS_PER_ELEMENT * DOFS_PER_ELEMENT);
        for row in self.ke.iter() {
            out.extend_from_slice(row);
        }
        out
    }
}

/// Isotropic elasticity matrix in Voigt order (xx, yy, zz, xy, yz, zx), E = 1.
fn elasticity_matrix(nu: f64) -> [[f64; 6]; 6] {
    let f = 1.0 / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mut d = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            d[i][j] = if i == j { (1.0 - nu) * f } else { nu * f };
        }
        d[i + 3][i + 3] = (1.0 - 2.0 * nu) / 2.0 * f;
    }
    d
}

/// Shape-function gradients w.r.t. physical coordinates at local point
/// (xi, eta, zeta) in [-1,1]^3. The unit-cube Jacobian is diag(1/2), so
/// physical gradients are twice the parent-space ones.
fn shape_gradients(xi: f64, eta: f64, zeta: f64) -> [[f64; 3]; 8] {
    let mut g = [[0.0; 3]; 8];
    for (k, off) in NODE_OFFSETS.iter().enumerate() {
        let sx = 2.0 * off[0] - 1.0;
        let sy = 2.0 * off[1] - 1.0;
        let sz = 2.0 * off[2] - 1.0;
        g[k][0] = 2.0 * sx * (1.0 + sy * eta) * (1.0 + sz * zeta) / 8.0;
        g[k][1] = 2.0 * sy * (1.0 + sx * xi) * (1.0 + sz * zeta) / 8.0;
        g[k][2] = 2.0 * sz * (1.0 + sx * xi) * (1.0 + sy * eta) / 8.0;
    }
    g
}

/// Computes the H8 stiffness with 2x2x2 Gauss quadrature.
pub fn build_element_stiffness(nu: f64) -> Result<ElementStiffness> {
    if !(0.0..0.5).contains(&nu) {
        return Err(TopoError::InvalidPoissonRatio(nu));
    }
    let d = elasticity_matrix(nu);
    let gp = 1.0 / 3.0_f64.sqrt();
    let det_j = 0.125; // unit cube, J = I/2

    let mut ke = Box::new([[0.0; DOFS_PER_ELEMENT]; DOFS_PER_ELEMENT]);
    for &xi in &[-gp, gp] {
        for &eta in &[-gp, gp] {
            for &zeta in &[-gp, gp] {
                let grad = shape_gradients(xi, eta, zeta);

                // Strain-displacement matrix, Voigt (xx, yy, zz, xy, yz, zx).
                let mut b = [[0.0; DOFS_PER_ELEMENT]; 6];
                for k in 0..8 {
                    let (gx, gy, gz) = (grad[k][0], grad[k][1], grad[k][2]);
                    let c = 3 * k;
                    b[0][c] = gx;
                    b[1][c + 1] = gy;
                    b[2][c + 2] = gz;
                    b[3][c] = gy;
                    b[3][c + 1] = gx;
                    b[4][c + 1] = gz;
                    b[4][c + 2] = gy;
                    b[5][c] = gz;
                    b[5][c + 2] = gx;
                }

                let mut db = [[0.0; DOFS_PER_ELEMENT]; 6];
                for i in 0..6 {
                    for j in 0..DOFS_PER_ELEMENT {
                        let mut s = 0.0;
                        for m in 0..6 {
                            s += d[i][m] * b[m][j];
                        }
                        db[i][j] = s;
                    }
                }
                for i in 0..DOFS_PER_ELEMENT {
                    for j in 0..DOFS_PER_ELEMENT {
                        let mut s = 0.0;
                        for m in 0..6 {
                            s += b[m][i] * db[m][j];
                        }
                        ke[i][j] += s * det_j;
                    }
                }
            }
        }
    }
    Ok(ElementStiffness { ke })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_poisson_ratio() {
        assert!(build_element_stiffness(-0.1).is_err());
        assert!(build_element_stiffness(0.5).is_err());
        assert!(build_element_stiffness(0.3).is_ok());
    }

    #[test]
    fn symmetric() {
        let ke = build_element_stiffness(0.3).unwrap().ke;
        for i in 0..24 {
            for j in 0..24 {
                assert!((ke[i][j] - ke[j][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rigid_translations_are_force_free() {
        let ke = build_element_stiffness(0.3).unwrap().ke;
        for axis in 0..3 {
            let mut t = [0.0; 24];
            for k in 0..8 {
                t[3 * k + axis] = 1.0;
            }
            for i in 0..24 {
                let r: f64 = (0..24).map(|j| ke[i][j] * t[j]).sum();
                assert!(r.abs() < 1e-12, "axis {axis} row {i}: {r}");
            }
        }
    }

    #[test]
    fn positive_semidefinite_with_six_rigid_modes() {
        let ke = build_element_stiffness(0.3).unwrap().ke;
        let m = nalgebra::DMatrix::from_fn(24, 24, |i, j| ke[i][j]);
        let eig = m.symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
        let zeros = eig
            .eigenvalues
            .iter()
            .filter(|&&l| l.abs() < 1e-8 * max)
            .count();
        assert_eq!(zeros, 6);
        assert!(eig.eigenvalues.iter().all(|&l| l > -1e-8 * max));
    }

    // Independent oracle: same physics, different code path. Shape-function
    // values are differentiated numerically and the integral uses a 3-point
    // Gauss rule (the integrand is quadratic per coordinate, so both rules
    // are exact and must agree to rounding).
    #[test]
    fn matches_independent_quadrature_oracle() {
        let ke = build_element_stiffness(0.3).unwrap().ke;
        let oracle = oracle_stiffness(0.3);
        for i in 0..24 {
            for j in 0..24 {
                assert!(
                    (ke[i][j] - oracle[i][j]).abs() < 1e-10,
                    "({i},{j}): {} vs {}",
                    ke[i][j],
                    oracle[i][j]
                );
            }
        }
    }

    fn shape_value(k: usize, x: f64, y: f64, z: f64) -> f64 {
        // Trilinear hat on the unit cube, written in physical coordinates.
        let o = NODE_OFFSETS[k];
        let fx = if o[0] > 0.5 { x } else { 1.0 - x };
        let fy = if o[1] > 0.5 { y } else { 1.0 - y };
        let fz = if o[2] > 0.5 { z } else { 1.0 - z };
        fx * fy * fz
    }

    fn oracle_stiffness(nu: f64) -> Vec<Vec<f64>> {
        let lambda = nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = 1.0 / (2.0 * (1.0 + nu));
        // 3-point Gauss on [0,1]
        let a = (3.0f64 / 5.0).sqrt() / 2.0;
        let pts = [0.5 - a, 0.5, 0.5 + a];
        let wts = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
        // Central differences are exact for trilinear shapes; h only sets
        // the cancellation level.
        let h = 1e-5;
        let grad = |k: usize, p: [f64; 3]| -> [f64; 3] {
            let mut g = [0.0; 3];
            for ax in 0..3 {
                let mut hi = p;
                let mut lo = p;
                hi[ax] += h;
                lo[ax] -= h;
                g[ax] = (shape_value(k, hi[0], hi[1], hi[2]) - shape_value(k, lo[0], lo[1], lo[2]))
                    / (2.0 * h);
            }
            g
        };
        let mut ke = vec![vec![0.0; 24]; 24];
        for (ix, &x) in pts.iter().enumerate() {
            for (iy, &y) in pts.iter().enumerate() {
                for (iz, &z) in pts.iter().enumerate() {
                    let w = wts[ix] * wts[iy] * wts[iz];
                    let grads: Vec<[f64; 3]> = (0..8).map(|k| grad(k, [x, y, z])).collect();
                    // Stiffness from the bilinear form
                    //   a(u,v) = lambda (div u)(div v) + 2 mu eps(u):eps(v)
                    for ka in 0..8 {
                        for ca in 0..3 {
                            for kb in 0..8 {
                                for cb in 0..3 {
                                    let ga = grads[ka];
                                    let gb = grads[kb];
                                    let mut v = lambda * ga[ca] * gb[cb];
                                    // eps(u):eps(v) for u = N_a e_ca, v = N_b e_cb
                                    let mut eps = 0.0;
                                    for p in 0..3 {
                                        for q in 0..3 {
                                            let ea = 0.5
                                                * (delta(ca, p) * ga[q] + delta(ca, q) * ga[p]);
                                            let eb = 0.5
                                                * (delta(cb, p) * gb[q] + delta(cb, q) * gb[p]);
                                            eps += ea * eb;
                                        }
                                    }
                                    v += 2.0 * mu * eps;
                                    ke[3 * ka + ca][3 * kb + cb] += w * v;
                                }
                            }
                        }
                    }
                }
            }
        }
        ke
    }

    fn delta(a: usize, b: usize) -> f64 {
        if a == b {
            1.0
        } else {
            0.0
        }
    }
}
