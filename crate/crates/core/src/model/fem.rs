//! Linear finite elements on the radial mesh, integrated against the
//! axisymmetric weight `2 pi r dr` (unit axial length).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;
use crate::model::material::{MaterialMap, B_EPS};
use crate::model::mesh::{Mesh1D, Region};

const GAUSS: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

/// Element quadrature points and weights (including `2 pi r`).
fn gauss_points(r0: f64, r1: f64) -> [(f64, f64); 2] {
    let mid = 0.5 * (r0 + r1);
    let half = 0.5 * (r1 - r0);
    let a = mid - half * GAUSS;
    let b = mid + half * GAUSS;
    [(a, half * 2.0 * PI * a), (b, half * 2.0 * PI * b)]
}

/// State-independent operators over all nodes, Dirichlet node included.
#[derive(Debug, Clone, PartialEq)]
pub struct AssembledOperators {
    /// Conductivity-weighted mass matrix.
    pub mass: Tridiagonal,
    /// Winding coupling vector, `X_p = int chi phi_p dA`.
    pub coupling: Vec<f64>,
}

pub fn assemble(mesh: &Mesh1D, materials: &MaterialMap) -> Result<AssembledOperators> {
    let n = mesh.node_count();
    let r = mesh.radii();
    let chi = 1.0 / mesh.geometry().wire_area();
    let mut mass = Tridiagonal::zeros(n);
    let mut coupling = vec![0.0; n];
    for (e, &region) in mesh.regions().iter().enumerate() {
        let (r0, r1) = (r[e], r[e + 1]);
        let h = r1 - r0;
        if !(h > 0.0) {
            return Err(Error::Mesh(format!("element {e} has non-positive length")));
        }
        let sigma = materials.conductivity(region);
        for (rq, wq) in gauss_points(r0, r1) {
            let phi = [(r1 - rq) / h, (rq - r0) / h];
            if sigma != 0.0 {
                for p in 0..2 {
                    for q in 0..2 {
                        mass.add(e + p, e + q, sigma * phi[p] * phi[q] * wq);
                    }
                }
            }
            if region == Region::Wire {
                for p in 0..2 {
                    coupling[e + p] += chi * phi[p] * wq;
                }
            }
        }
    }
    Ok(AssembledOperators { mass, coupling })
}

/// Nonlinear stiffness action `K(a) a` and its Jacobian over all nodes.
///
/// The flux density in an element is `|a'|`. The Jacobian uses the
/// differential reluctivity `nu + B dnu/dB`, frozen at `nu(B_EPS)` for
/// vanishing fields.
pub fn stiffness_and_jacobian(a: &[f64], mesh: &Mesh1D, materials: &MaterialMap) -> Result<(Vec<f64>, Tridiagonal)> {
    let n = mesh.node_count();
    if a.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a.len(),
        });
    }
    let r = mesh.radii();
    let mut action = vec![0.0; n];
    let mut jac = Tridiagonal::zeros(n);
    for (e, &region) in mesh.regions().iter().enumerate() {
        let (r0, r1) = (r[e], r[e + 1]);
        let h = r1 - r0;
        let grad = [-1.0 / h, 1.0 / h];
        let slope = (a[e + 1] - a[e]) / h;
        let b = slope.abs();
        for (_, wq) in gauss_points(r0, r1) {
            let (nu, dnu) = materials.reluctivity(b, region)?;
            let nu_d = if b < B_EPS {
                materials.reluctivity(B_EPS, region)?.0
            } else {
                nu + b * dnu
            };
            for p in 0..2 {
                action[e + p] += wq * nu * slope * grad[p];
                for q in 0..2 {
                    jac.add(e + p, e + q, wq * nu_d * grad[p] * grad[q]);
                }
            }
        }
    }
    Ok((action, jac))
}

/// Stored magnetic energy per unit length, `sum_e int w(|a'|) dA`. Its
/// gradient is the stiffness action.
pub fn magnetic_energy(a: &[f64], mesh: &Mesh1D, materials: &MaterialMap) -> Result<f64> {
    let n = mesh.node_count();
    if a.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: a.len(),
        });
    }
    let r = mesh.radii();
    let mut total = 0.0;
    for (e, &region) in mesh.regions().iter().enumerate() {
        let (r0, r1) = (r[e], r[e + 1]);
        let b = ((a[e + 1] - a[e]) / (r1 - r0)).abs();
        let w = materials.energy_density(b, region)?;
        for (_, wq) in gauss_points(r0, r1) {
            total += wq * w;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::material::{Reluctivity, NU0};
    use crate::model::mesh::CoaxGeometry;

    #[test]
    fn single_shield_element_mass_is_exact() {
        // Geometry scaled so the single element [1, 2] is shield.
        let g = CoaxGeometry {
            r_wire: 0.25,
            r_ins: 1.0,
            r_out: 2.0,
        };
        let mesh = Mesh1D::new(
            vec![0.0, 0.25, 1.0, 2.0],
            vec![Region::Wire, Region::Insulator, Region::Shield],
            g,
        )
        .unwrap();
        let mats = MaterialMap::new(1.0, Reluctivity::Constant(1.0)).unwrap();
        let ops = assemble(&mesh, &mats).unwrap();
        // phi0 = 2 - r, phi1 = r - 1; expand and use the moments
        // int r = 3/2, int r^2 = 7/3, int r^3 = 15/4 over [1, 2].
        let m00 = 2.0 * PI * (4.0 * 1.5 - 4.0 * (7.0 / 3.0) + 15.0 / 4.0);
        let m01 = 2.0 * PI * (-2.0 * 1.5 + 3.0 * (7.0 / 3.0) - 15.0 / 4.0);
        let m11 = 2.0 * PI * (1.5 - 2.0 * (7.0 / 3.0) + 15.0 / 4.0);
        assert!((ops.mass.get(2, 2) - m00).abs() < 1e-13);
        assert!((ops.mass.get(2, 3) - m01).abs() < 1e-13);
        assert!((ops.mass.get(3, 2) - m01).abs() < 1e-13);
        assert!((ops.mass.get(3, 3) - m11).abs() < 1e-13);
        assert_eq!(ops.mass.get(0, 0), 0.0);
        assert_eq!(ops.mass.get(1, 1), 0.0);
    }

    #[test]
    fn coupling_sums_to_one() {
        for nodes in [4, 7, 65, 129] {
            let mesh = Mesh1D::coax(nodes, CoaxGeometry::default()).unwrap();
            let ops = assemble(&mesh, &MaterialMap::nonlinear_default()).unwrap();
            let s: f64 = ops.coupling.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "{nodes}: {s}");
        }
    }

    #[test]
    fn linear_materials_give_constant_jacobian() {
        let mesh = Mesh1D::coax(9, CoaxGeometry::default()).unwrap();
        let mats = MaterialMap::nonlinear_default().linearized();
        let a: Vec<f64> = (0..9)
            .map(|k| if k == 8 { 0.0 } else { 1e-3 * (k as f64).sin() })
            .collect();
        let (ka, j1) = stiffness_and_jacobian(&a, &mesh, &mats).unwrap();
        let (_, j0) = stiffness_and_jacobian(&[0.0; 9], &mesh, &mats).unwrap();
        assert_eq!(j1, j0);
        let lin = j0.matvec(&a);
        for (x, y) in ka.iter().zip(&lin) {
            assert!((x - y).abs() <= 1e-9 * y.abs().max(1.0));
        }
        assert!(j0.diag[0] > 0.0 && j0.diag[0] < NU0 * 1e3);
    }

    #[test]
    fn zero_potential_gives_zero_action() {
        let mesh = Mesh1D::coax(17, CoaxGeometry::default()).unwrap();
        let (ka, _) = stiffness_and_jacobian(&[0.0; 17], &mesh, &MaterialMap::nonlinear_default()).unwrap();
        assert!(ka.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn energy_gradient_is_stiffness_action() {
        let mesh = Mesh1D::coax(17, CoaxGeometry::default()).unwrap();
        let mats = MaterialMap::nonlinear_default();
        let a: Vec<f64> = (0..17)
            .map(|k| {
                if k == 16 {
                    0.0
                } else {
                    2e-3 * (1.0 - k as f64 / 16.0).powi(2)
                }
            })
            .collect();
        let (ka, _) = stiffness_and_jacobian(&a, &mesh, &mats).unwrap();
        for p in 0..16 {
            let h = 1e-9;
            let mut ap = a.clone();
            ap[p] += h;
            let mut am = a.clone();
            am[p] -= h;
            let fd =
                (magnetic_energy(&ap, &mesh, &mats).unwrap() - magnetic_energy(&am, &mesh, &mats).unwrap()) / (2.0 * h);
            assert!(
                (fd - ka[p]).abs() <= 1e-5 * ka[p].abs().max(1.0),
                "{p}: {fd} vs {}",
                ka[p]
            );
        }
    }

    #[test]
    fn dimension_checked() {
        let mesh = Mesh1D::coax(17, CoaxGeometry::default()).unwrap();
        assert!(stiffness_and_jacobian(&[0.0; 3], &mesh, &MaterialMap::nonlinear_default()).is_err());
    }
}
