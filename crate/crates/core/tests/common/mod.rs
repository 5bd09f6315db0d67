#![allow(dead_code)]

use std::sync::Arc;

use eddy_mgrit::mgrit::Hierarchy;
use eddy_mgrit::model::{CoaxGeometry, EddyCurrentModel, MaterialMap, Mesh1D, PwmSource, State};
use eddy_mgrit::stepper::{NewtonConfig, Stepper};

/// Coarse 17-node cable; cheap enough for many solves.
pub fn small_model(linear: bool) -> Arc<EddyCurrentModel> {
    let mesh = Mesh1D::coax(17, CoaxGeometry::default()).unwrap();
    let mats = MaterialMap::nonlinear_default();
    let mats = if linear { mats.linearized() } else { mats };
    Arc::new(EddyCurrentModel::new(mesh, mats, PwmSource::default()).unwrap())
}

pub fn stepper(model: Arc<EddyCurrentModel>) -> Stepper {
    Stepper::new(model, NewtonConfig::default())
}

pub fn hierarchy(linear: bool, nt: usize, m: usize, levels: usize) -> Hierarchy {
    Hierarchy::uniform(stepper(small_model(linear)), 0.04, nt, m, levels).unwrap()
}

pub fn hierarchy_factors(linear: bool, nt: usize, factors: &[usize]) -> Hierarchy {
    Hierarchy::with_factors(stepper(small_model(linear)), 0.04, nt, factors).unwrap()
}

/// Sequential trajectory on the finest level of `h` from the zero state.
pub fn sequential(h: &Hierarchy) -> Vec<State> {
    let u0 = h.stepper().model().zero_state();
    h.stepper().time_stepping(&u0, &h.finest().times).unwrap()
}

pub fn max_abs(u: &[State]) -> f64 {
    u.iter()
        .flat_map(|s| s.a.iter().copied().chain(std::iter::once(s.i)))
        .fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest componentwise difference over the series, relative to the
/// largest magnitude in `b`, taken separately for potentials and currents.
pub fn max_rel_diff(a: &[State], b: &[State]) -> f64 {
    let amax = b.iter().flat_map(|s| s.a.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    let imax = b.iter().fold(0.0f64, |m, s| m.max(s.i.abs()));
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        for (p, q) in x.a.iter().zip(&y.a) {
            worst = worst.max((p - q).abs() / amax.max(f64::MIN_POSITIVE));
        }
        worst = worst.max((x.i - y.i).abs() / imax.max(f64::MIN_POSITIVE));
    }
    worst
}

pub fn bitwise_eq(a: &[State], b: &[State]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.i.to_bits() == y.i.to_bits() && x.a.iter().zip(&y.a).all(|(p, q)| p.to_bits() == q.to_bits())
        })
}
