use crate::error::{Error, Result};
use crate::linalg::Tridiagonal;

/// Newton system of one backward-Euler step:
///
/// ```text
/// [ J_aa     -X ] [da]   [rhs_a]
/// [ X^T/dt    0 ] [di] = [rhs_i]
/// ```
#[derive(Debug, Clone)]
pub struct BorderedSystem {
    pub jaa: Tridiagonal,
    pub coupling: Vec<f64>,
    pub dt: f64,
    pub rhs_a: Vec<f64>,
    pub rhs_i: f64,
}

/// Tridiagonal LU on `J_aa`, then the scalar Schur complement for `di`.
pub fn solve_bordered(sys: &BorderedSystem) -> Result<(Vec<f64>, f64)> {
    let n = sys.jaa.dim();
    for len in [sys.coupling.len(), sys.rhs_a.len()] {
        if len != n {
            return Err(Error::Dimension { expected: n, got: len });
        }
    }
    let lu = sys.jaa.factor()?;
    let y = lu.solve(&sys.rhs_a);
    let z = lu.solve(&sys.coupling);
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
    let schur = dot(&sys.coupling, &z) / sys.dt;
    let scale = (dot(&sys.coupling, &sys.coupling) * dot(&z, &z)).sqrt() / sys.dt;
    if !schur.is_finite() || schur.abs() <= 1e3 * f64::EPSILON * scale || schur == 0.0 {
        return Err(Error::ZeroSchur { value: schur });
    }
    let di = (sys.rhs_i - dot(&sys.coupling, &y) / sys.dt) / schur;
    let da = y.iter().zip(&z).map(|(yk, zk)| yk + zk * di).collect();
    Ok((da, di))
}
