//! Coaxial-cable eddy-current model: radial finite elements for the
//! magnetic vector potential coupled to a voltage-driven stranded winding.

pub mod fem;
pub mod material;
pub mod mesh;
pub mod source;

pub use fem::{assemble, magnetic_energy, stiffness_and_jacobian, AssembledOperators};
pub use material::{parse_table, MaterialMap, Reluctivity, ReluctivitySpline, MU0, NU0};
pub use mesh::{CoaxGeometry, Mesh1D, Region};
pub use source::PwmSource;

use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;

/// Unknowns at one time point: nodal potentials (outer node pinned to zero)
/// and the winding current.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub a: Vec<f64>,
    pub i: f64,
}

impl State {
    pub fn zeros(nodes: usize) -> Self {
        State {
            a: vec![0.0; nodes],
            i: 0.0,
        }
    }

    pub fn nodes(&self) -> usize {
        self.a.len()
    }

    pub fn add_assign(&mut self, other: &State) {
        for (x, y) in self.a.iter_mut().zip(&other.a) {
            *x += y;
        }
        self.i += other.i;
    }

    pub fn sub(&self, other: &State) -> State {
        State {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x - y).collect(),
            i: self.i - other.i,
        }
    }

    pub fn add(&self, other: &State) -> State {
        State {
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            i: self.i + other.i,
        }
    }

    pub fn scale(&self, alpha: f64) -> State {
        State {
            a: self.a.iter().map(|x| alpha * x).collect(),
            i: alpha * self.i,
        }
    }

    /// Squared 2-norm over the free potentials and the current.
    pub fn norm_sq(&self) -> f64 {
        let free = &self.a[..self.a.len() - 1];
        free.iter().map(|x| x * x).sum::<f64>() + self.i * self.i
    }
}

/// The semi-discrete field-circuit model. Immutable once built.
#[derive(Debug, Clone)]
pub struct EddyCurrentModel {
    mesh: Mesh1D,
    materials: MaterialMap,
    ops: AssembledOperators,
    source: PwmSource,
}

impl EddyCurrentModel {
    pub fn new(mesh: Mesh1D, materials: MaterialMap, source: PwmSource) -> Result<Self> {
        let ops = assemble(&mesh, &materials)?;
        Ok(EddyCurrentModel {
            mesh,
            materials,
            ops,
            source,
        })
    }

    /// Default cable: 65 nodes, 1/2/3 mm radii, soft-iron shield, 0.25 V PWM.
    pub fn default_cable() -> Self {
        let mesh = Mesh1D::coax(65, CoaxGeometry::default()).expect("default mesh");
        Self::new(mesh, MaterialMap::nonlinear_default(), PwmSource::default()).expect("default model")
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn materials(&self) -> &MaterialMap {
        &self.materials
    }

    pub fn operators(&self) -> &AssembledOperators {
        &self.ops
    }

    pub fn source(&self) -> &PwmSource {
        &self.source
    }

    pub fn nodes(&self) -> usize {
        self.mesh.node_count()
    }

    pub fn free(&self) -> usize {
        self.mesh.free_count()
    }

    pub fn zero_state(&self) -> State {
        State::zeros(self.nodes())
    }

    /// `X^T a`, the winding flux linkage per unit length.
    pub fn flux_linkage(&self, a: &[f64]) -> f64 {
        self.ops.coupling.iter().zip(a).map(|(x, y)| x * y).sum()
    }

    pub fn stiffness(&self, a: &[f64]) -> Result<(Vec<f64>, Tridiagonal)> {
        stiffness_and_jacobian(a, &self.mesh, &self.materials)
    }

    /// Magnetic energy of the potential `a` plus the eddy-current
    /// dissipation term of a step of length `dt` from `a_prev`. Backward Euler
    /// minimizes this over potentials with prescribed flux linkage.
    pub fn step_energy(&self, a: &[f64], a_prev: &[f64], dt: f64) -> Result<f64> {
        let da: Vec<f64> = a.iter().zip(a_prev).map(|(x, y)| x - y).collect();
        let dissipation: f64 = self.ops.mass.matvec(&da).iter().zip(&da).map(|(x, y)| x * y).sum();
        Ok(0.5 * dissipation / dt + magnetic_energy(a, &self.mesh, &self.materials)?)
    }

    fn check(&self, u: &State) -> Result<()> {
        if u.nodes() != self.nodes() {
            return Err(Error::Dimension {
                expected: self.nodes(),
                got: u.nodes(),
            });
        }
        Ok(())
    }

    /// Backward-Euler residual for a prescribed source voltage. Field rows
    /// for the free nodes come first, the circuit row last.
    pub fn residual_with_voltage(&self, u: &State, u_prev: &State, dt: f64, voltage: f64) -> Result<Vec<f64>> {
        self.check(u)?;
        self.check(u_prev)?;
        if !(dt > 0.0) {
            return Err(Error::TimeGrid(format!("time step must be positive, got {dt}")));
        }
        let nf = self.free();
        let da: Vec<f64> = u.a.iter().zip(&u_prev.a).map(|(x, y)| x - y).collect();
        let m_da = self.ops.mass.matvec(&da);
        let (ka, _) = self.stiffness(&u.a)?;
        let x = &self.ops.coupling;
        let mut r = Vec::with_capacity(nf + 1);
        for p in 0..nf {
            r.push(m_da[p] / dt + ka[p] - x[p] * u.i);
        }
        r.push(self.flux_linkage(&da) / dt - voltage);
        Ok(r)
    }

    /// Residual of one backward-Euler step ending at time `t`.
    pub fn dae_residual(&self, u: &State, u_prev: &State, dt: f64, t: f64) -> Result<Vec<f64>> {
        self.residual_with_voltage(u, u_prev, dt, self.source.voltage(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_state_is_stationary_without_source() {
        let m = EddyCurrentModel::default_cable();
        let z = m.zero_state();
        let r = m.dae_residual(&z, &z, 1e-4, 0.0).unwrap();
        assert_eq!(r.len(), m.free() + 1);
        assert!(r.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_state_under_pulse_leaves_only_circuit_row() {
        let m = EddyCurrentModel::default_cable();
        let z = m.zero_state();
        let r = m.dae_residual(&z, &z, 1e-4, 0.005).unwrap();
        let (last, fields) = r.split_last().unwrap();
        assert!(fields.iter().all(|&v| v == 0.0));
        assert_eq!(*last, -0.25);
    }

    #[test]
    fn flux_linkage_of_constant_wire_potential() {
        let m = EddyCurrentModel::default_cable();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r_wire = m.mesh().geometry().r_wire;
        let a: Vec<f64> = m
            .mesh()
            .radii()
            .iter()
            .map(|&r| if r <= r_wire { 0.7 } else { rng.gen::<f64>() })
            .collect();
        assert!((m.flux_linkage(&a) - 0.7).abs() < 1e-12);
        assert_eq!(m.flux_linkage(&vec![0.0; m.nodes()]), 0.0);
    }

    #[test]
    fn flux_linkage_matches_fine_quadrature() {
        // Midpoint rule on the piecewise-linear interpolant over the wire.
        let m = EddyCurrentModel::default_cable();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut a: Vec<f64> = (0..m.nodes()).map(|_| rng.gen::<f64>() - 0.5).collect();
        *a.last_mut().unwrap() = 0.0;
        let radii = m.mesh().radii();
        let rw = m.mesh().geometry().r_wire;
        let chi = 1.0 / m.mesh().geometry().wire_area();
        let samples = 200_000;
        let mut sum = 0.0;
        for s in 0..samples {
            let r = (s as f64 + 0.5) / samples as f64 * rw;
            let e = radii.partition_point(|&x| x <= r) - 1;
            let t = (r - radii[e]) / (radii[e + 1] - radii[e]);
            let val = a[e] * (1.0 - t) + a[e + 1] * t;
            sum += chi * val * 2.0 * std::f64::consts::PI * r * (rw / samples as f64);
        }
        assert!(
            (m.flux_linkage(&a) - sum).abs() < 1e-8,
            "{} vs {sum}",
            m.flux_linkage(&a)
        );
    }

    #[test]
    fn mass_is_symmetric_positive_semidefinite() {
        let m = EddyCurrentModel::default_cable();
        let mass = &m.operators().mass;
        assert!(mass.is_symmetric(1e-14));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..1000 {
            let a: Vec<f64> = (0..m.nodes()).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let q: f64 = mass.matvec(&a).iter().zip(&a).map(|(x, y)| x * y).sum();
            assert!(q >= 0.0);
        }
        // Nodes strictly inside the non-conducting regions have empty rows.
        let r_ins = m.mesh().geometry().r_ins;
        for (k, &r) in m.mesh().radii().iter().enumerate() {
            if r < r_ins {
                assert_eq!(mass.diag[k], 0.0);
            }
        }
    }

    #[test]
    fn residual_dimension_mismatch() {
        let m = EddyCurrentModel::default_cable();
        let bad = State::zeros(3);
        assert!(m.dae_residual(&bad, &m.zero_state(), 1e-4, 0.0).is_err());
    }
}
