//! Backward Euler with an exact Newton solve per step.

mod bordered;

pub use bordered::{solve_bordered, BorderedSystem};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{EddyCurrentModel, State};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Absolute tolerance on the RMS residual.
    pub atol: f64,
    /// Tolerance relative to the RMS residual of the initial iterate.
    pub rtol: f64,
    pub max_iterations: usize,
    /// Initial step length in `(0, 1]`; backtracking halves it while the
    /// residual does not decrease.
    pub damping: f64,
    /// Updates smaller than this, relative to the iterate, mean the solve is
    /// at machine precision and is accepted.
    pub step_tol: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        NewtonConfig {
            atol: 1e-9,
            rtol: 1e-10,
            max_iterations: 25,
            damping: 1.0,
            step_tol: 1e-14,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.atol > 0.0 && self.rtol > 0.0 && self.step_tol >= 0.0) {
            return Err(Error::ConfigFile("Newton tolerances must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::ConfigFile("Newton needs at least one iteration".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::ConfigFile(format!(
                "Newton damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Diagnostics of one Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// RMS residual of every iterate, the initial guess first.
    pub residuals: Vec<f64>,
}

impl NewtonReport {
    /// True when every iterate decreased the residual.
    pub fn monotone(&self) -> bool {
        self.residuals.windows(2).all(|w| w[1] < w[0])
    }
}

const MAX_BACKTRACKS: usize = 30;

fn update(u: &State, da: &[f64], di: f64, lambda: f64) -> State {
    let mut out = u.clone();
    for (x, d) in out.a.iter_mut().zip(da) {
        *x += lambda * d;
    }
    out.i += lambda * di;
    out
}

fn relative_update(u: &State, da: &[f64], di: f64) -> f64 {
    let amax = u.a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let damax = da.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let ra = if damax == 0.0 { 0.0 } else { damax / amax };
    let ri = if di == 0.0 { 0.0 } else { di.abs() / u.i.abs() };
    ra.max(ri)
}

fn rms(r: &[f64]) -> f64 {
    (r.iter().map(|x| x * x).sum::<f64>() / r.len() as f64).sqrt()
}

/// Backward-Euler propagator for the cable model. Cheap to clone and safe to
/// share between threads.
#[derive(Debug, Clone)]
pub struct Stepper {
    model: Arc<EddyCurrentModel>,
    newton: NewtonConfig,
}

impl Stepper {
    pub fn new(model: Arc<EddyCurrentModel>, newton: NewtonConfig) -> Self {
        Stepper { model, newton }
    }

    pub fn model(&self) -> &EddyCurrentModel {
        &self.model
    }

    pub fn newton(&self) -> &NewtonConfig {
        &self.newton
    }

    /// Residual and Newton system at iterate `u`.
    fn linearize(&self, u: &State, u_prev: &State, dt: f64, voltage: f64) -> Result<(Vec<f64>, BorderedSystem)> {
        let m = &*self.model;
        let nf = m.free();
        let ops = m.operators();
        let (ka, jk) = m.stiffness(&u.a)?;
        let da: Vec<f64> = u.a.iter().zip(&u_prev.a).map(|(x, y)| x - y).collect();
        let m_da = ops.mass.matvec(&da);
        let x = &ops.coupling;
        let mut r = Vec::with_capacity(nf + 1);
        for p in 0..nf {
            r.push(m_da[p] / dt + ka[p] - x[p] * u.i);
        }
        r.push(m.flux_linkage(&da) / dt - voltage);

        let mut jaa = jk.leading(nf);
        jaa.scaled_add(1.0 / dt, &ops.mass.leading(nf));
        let (rhs_a, rhs_i) = (r[..nf].iter().map(|v| -v).collect(), -r[nf]);
        let sys = BorderedSystem {
            jaa,
            coupling: x[..nf].to_vec(),
            dt,
            rhs_a,
            rhs_i,
        };
        Ok((r, sys))
    }

    /// Solve the backward-Euler equations of a step of length `dt` ending at
    /// `t`, starting Newton from `u_prev`.
    pub fn solve_step(&self, u_prev: &State, t: f64, dt: f64) -> Result<(State, NewtonReport)> {
        self.solve_step_with_voltage(u_prev, self.model.source().voltage(t), dt)
    }

    /// As [`Stepper::solve_step`], with the winding voltage given directly.
    pub fn solve_step_with_voltage(&self, u_prev: &State, voltage: f64, dt: f64) -> Result<(State, NewtonReport)> {
        if !(dt > 0.0) {
            return Err(Error::TimeGrid(format!("time step must be positive, got {dt}")));
        }
        if u_prev.nodes() != self.model.nodes() {
            return Err(Error::Dimension {
                expected: self.model.nodes(),
                got: u_prev.nodes(),
            });
        }
        let cfg = &self.newton;
        let model = &*self.model;
        let mut u = u_prev.clone();
        let (r, mut sys) = self.linearize(&u, u_prev, dt, voltage)?;
        let r0 = rms(&r);
        let tol = cfg.atol.max(cfg.rtol * r0);
        let mut residuals = vec![r0];
        let mut gradient: Vec<f64> = Vec::new();
        let mut iterations = 0;
        while *residuals.last().unwrap() > tol {
            if iterations == cfg.max_iterations {
                return Err(Error::NewtonDiverged {
                    iterations,
                    residual: *residuals.last().unwrap(),
                });
            }
            let (da, di) = solve_bordered(&sys)?;
            let tiny = relative_update(&u, &da, di) <= cfg.step_tol;

            // The first step enforces the (linear) flux constraint; after it,
            // Newton directions keep the flux fixed and the step energy is a
            // valid merit function.
            let mut lambda = cfg.damping;
            if iterations > 0 && !tiny {
                let slope: f64 = gradient.iter().zip(&da).map(|(g, d)| g * d).sum();
                let e0 = model.step_energy(&u.a, &u_prev.a, dt)?;
                if slope < 0.0 && slope.abs() > 1e-13 * e0.abs() {
                    let mut found = false;
                    for _ in 0..MAX_BACKTRACKS {
                        let trial = update(&u, &da, di, lambda);
                        if model.step_energy(&trial.a, &u_prev.a, dt)? <= e0 + 1e-4 * lambda * slope {
                            found = true;
                            break;
                        }
                        lambda *= 0.5;
                    }
                    if !found {
                        lambda = cfg.damping;
                    }
                }
            }
            u = update(&u, &da, di, lambda);
            iterations += 1;
            let (r, next) = self.linearize(&u, u_prev, dt, voltage)?;
            sys = next;
            residuals.push(rms(&r));
            if tiny {
                break;
            }
            // Energy gradient over the free potentials: field residual + X i.
            gradient = r[..r.len() - 1]
                .iter()
                .zip(&sys.coupling)
                .map(|(rp, xp)| rp + xp * u.i)
                .collect();
        }
        Ok((u, NewtonReport { iterations, residuals }))
    }

    /// One step from `t_prev` to `t_next`.
    pub fn step(&self, u_prev: &State, t_prev: f64, t_next: f64) -> Result<State> {
        if !(t_next > t_prev) {
            return Err(Error::TimeGrid(format!(
                "t_next = {t_next} must exceed t_prev = {t_prev}"
            )));
        }
        self.solve_step(u_prev, t_next, t_next - t_prev).map(|(u, _)| u)
    }

    /// Sequential forward sweep over `times`; `u0` sits at `times[0]`.
    pub fn time_stepping(&self, u0: &State, times: &[f64]) -> Result<Vec<State>> {
        if times.is_empty() {
            return Err(Error::TimeGrid("empty time grid".into()));
        }
        let mut out = Vec::with_capacity(times.len());
        out.push(u0.clone());
        for j in 1..times.len() {
            let next = self
                .step(&out[j - 1], times[j - 1], times[j])
                .map_err(|e| e.at_step(j))?;
            out.push(next);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CoaxGeometry, MaterialMap, Mesh1D, PwmSource};

    fn linear_model() -> Arc<EddyCurrentModel> {
        let mesh = Mesh1D::coax(33, CoaxGeometry::default()).unwrap();
        Arc::new(
            EddyCurrentModel::new(
                mesh,
                MaterialMap::nonlinear_default().linearized(),
                PwmSource::default(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn linear_step_takes_one_newton_iteration() {
        let s = Stepper::new(linear_model(), NewtonConfig::default());
        let z = s.model().zero_state();
        let (u, rep) = s.solve_step(&z, 0.005, 1e-4).unwrap();
        assert_eq!(rep.iterations, 1, "{:?}", rep.residuals);
        assert!(u.i != 0.0);
    }

    #[test]
    fn zero_source_keeps_zero_state() {
        let s = Stepper::new(Arc::new(EddyCurrentModel::default_cable()), NewtonConfig::default());
        let z = s.model().zero_state();
        let u = s.step(&z, 0.0, 1e-9).unwrap();
        assert_eq!(u, z);
    }

    #[test]
    fn rejects_backwards_step() {
        let s = Stepper::new(linear_model(), NewtonConfig::default());
        let z = s.model().zero_state();
        assert!(s.step(&z, 1.0, 1.0).is_err());
    }

    #[test]
    fn newton_failure_is_reported() {
        let cfg = NewtonConfig {
            max_iterations: 1,
            ..NewtonConfig::default()
        };
        let s = Stepper::new(Arc::new(EddyCurrentModel::default_cable()), cfg);
        let z = s.model().zero_state();
        let err = s.solve_step(&z, 0.005, 1e-2).unwrap_err();
        assert!(matches!(err, Error::NewtonDiverged { iterations: 1, .. }), "{err:?}");
    }
}
