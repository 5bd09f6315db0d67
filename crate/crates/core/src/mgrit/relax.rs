//! Block-row kernels on a contiguous span of one level.
//!
//! Every block row reads `u[j-1]` and `u[j]` only. A span `lo..lo+len` is
//! handed the state just left of it (`left = u[lo-1]`) when a row at `lo`
//! needs it; that is the only non-local data a worker ever sees.

use crate::error::{Error, Result};
use crate::model::State;

use super::hierarchy::Hierarchy;

/// `Psi(u_prev)`: one backward-Euler step on level `level` from point
/// `j - 1` to point `j`, exactly as the sequential time stepper takes it.
pub fn propagate(h: &Hierarchy, level: usize, j: usize, u_prev: &State) -> Result<State> {
    let lv = h.level(level);
    h.stepper()
        .solve_step(u_prev, lv.times[j], lv.times[j] - lv.times[j - 1])
        .map(|(u, _)| u)
        .map_err(|e| e.at_step(j))
}

fn predecessor<'a>(lo: usize, j: usize, u: &'a [State], left: Option<&'a State>) -> &'a State {
    if j > lo {
        &u[j - lo - 1]
    } else {
        left.expect("row needs the state left of the span")
    }
}

/// F-relaxation of points `lo..lo+u.len()`: every F-point, in increasing
/// order, becomes `Psi(u[j-1]) + g[j]`.
pub fn f_relax_span(
    h: &Hierarchy,
    level: usize,
    lo: usize,
    u: &mut [State],
    g: &[State],
    left: Option<&State>,
) -> Result<()> {
    let lv = h.level(level);
    for j in lo..lo + u.len() {
        if lv.is_c_point(j) {
            continue;
        }
        let mut next = propagate(h, level, j, predecessor(lo, j, u, left))?;
        next.add_assign(&g[j - lo]);
        u[j - lo] = next;
    }
    Ok(())
}

/// C-relaxation: every C-point `c > 0` in the span becomes
/// `Psi(u[c-1]) + g[c]`.
pub fn c_relax_span(
    h: &Hierarchy,
    level: usize,
    lo: usize,
    u: &mut [State],
    g: &[State],
    left: Option<&State>,
) -> Result<()> {
    let lv = h.level(level);
    for j in lo..lo + u.len() {
        if j == 0 || !lv.is_c_point(j) {
            continue;
        }
        let mut next = propagate(h, level, j, predecessor(lo, j, u, left))?;
        next.add_assign(&g[j - lo]);
        u[j - lo] = next;
    }
    Ok(())
}

/// Residual rows `g - A(u)` of the span.
pub fn residual_span(
    h: &Hierarchy,
    level: usize,
    lo: usize,
    u: &[State],
    g: &[State],
    left: Option<&State>,
) -> Result<Vec<State>> {
    let mut out = Vec::with_capacity(u.len());
    for j in lo..lo + u.len() {
        let au = if j == 0 {
            u[0].clone()
        } else {
            u[j - lo].sub(&propagate(h, level, j, predecessor(lo, j, u, left))?)
        };
        out.push(g[j - lo].sub(&au));
    }
    Ok(out)
}

/// Injection and FAS right-hand side for the C-points of a fine span.
///
/// `left_fine` is `u[lo-1]`; `left_coarse` is the fine state at the last
/// C-point before the span's first C-point. Returns `(R u, g2)` for the
/// coarse points owned by the span.
pub fn restrict_span(
    h: &Hierarchy,
    level: usize,
    lo: usize,
    u: &[State],
    g: &[State],
    left_fine: Option<&State>,
    left_coarse: Option<&State>,
) -> Result<(Vec<State>, Vec<State>)> {
    let m = h
        .level(level)
        .factor
        .ok_or_else(|| Error::Hierarchy(format!("level {level} has no coarser level")))?;
    let mut u2 = Vec::new();
    let mut g2 = Vec::new();
    let mut prev_c: Option<&State> = left_coarse;
    for j in lo..lo + u.len() {
        if !j.is_multiple_of(m) {
            continue;
        }
        let uc = &u[j - lo];
        let rhs = if j == 0 {
            // A2(Ru) row 0 is the state itself.
            uc.add(&g[0].sub(uc))
        } else {
            let k = j / m;
            let coarse_prev = prev_c.expect("restriction needs the previous C-point");
            let a2 = uc.sub(&propagate(h, level + 1, k, coarse_prev)?);
            let fine_prev = predecessor(lo, j, u, left_fine);
            let r = g[j - lo].sub(&uc.sub(&propagate(h, level, j, fine_prev)?));
            a2.add(&r)
        };
        u2.push(uc.clone());
        g2.push(rhs);
        prev_c = Some(uc);
    }
    Ok((u2, g2))
}

/// Runs the per-level sweeps of a cycle. Implementations decide how the
/// points of a level are distributed; results must not depend on it.
pub trait Executor: Send + Sync {
    fn f_relax(&self, h: &Hierarchy, level: usize, u: &mut [State], g: &[State]) -> Result<()>;

    fn c_relax(&self, h: &Hierarchy, level: usize, u: &mut [State], g: &[State]) -> Result<()>;

    /// Squared residual norm of every block row, row 0 included, in order.
    fn residual_rows(&self, h: &Hierarchy, level: usize, u: &[State], g: &[State]) -> Result<Vec<f64>>;

    /// Coarse initial iterate and FAS right-hand side.
    fn restrict(&self, h: &Hierarchy, level: usize, u: &[State], g: &[State]) -> Result<(Vec<State>, Vec<State>)>;
}

/// Everything on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn f_relax(&self, h: &Hierarchy, level: usize, u: &mut [State], g: &[State]) -> Result<()> {
        f_relax_span(h, level, 0, u, g, None)
    }

    fn c_relax(&self, h: &Hierarchy, level: usize, u: &mut [State], g: &[State]) -> Result<()> {
        c_relax_span(h, level, 0, u, g, None)
    }

    fn residual_rows(&self, h: &Hierarchy, level: usize, u: &[State], g: &[State]) -> Result<Vec<f64>> {
        Ok(residual_span(h, level, 0, u, g, None)?
            .iter()
            .map(State::norm_sq)
            .collect())
    }

    fn restrict(&self, h: &Hierarchy, level: usize, u: &[State], g: &[State]) -> Result<(Vec<State>, Vec<State>)> {
        restrict_span(h, level, 0, u, g, None, None)
    }
}

/// `A(u)` on a whole level: row 0 is `u_0`, row `j` is `u_j - Psi(u_{j-1})`.
pub fn apply_a(h: &Hierarchy, level: usize, u: &[State]) -> Result<Vec<State>> {
    check_len(h, level, u.len())?;
    let zeros = vec![State::zeros(u[0].nodes()); u.len()];
    Ok(residual_span(h, level, 0, u, &zeros, None)?
        .into_iter()
        .map(|r| r.scale(-1.0))
        .collect())
}

pub fn f_relax(h: &Hierarchy, level: usize, u: &mut [State], g: &[State]) -> Result<()> {
    check_len(h, level, u.len())?;
    Sequential.f_relax(h, level, u, g)
}

pub fn c_relax(h: &Hierarchy, level: usize, u: &mut [State], g: &[State]) -> Result<()> {
    check_len(h, level, u.len())?;
    Sequential.c_relax(h, level, u, g)
}

pub fn fcf_relax(h: &Hierarchy, level: usize, u: &mut [State], g: &[State]) -> Result<()> {
    f_relax(h, level, u, g)?;
    c_relax(h, level, u, g)?;
    f_relax(h, level, u, g)
}

/// Values at the C-points of `level`, in order.
pub fn restrict_injection<T: Clone>(h: &Hierarchy, level: usize, x: &[T]) -> Result<Vec<T>> {
    check_len(h, level, x.len())?;
    let lv = h.level(level);
    let m = lv
        .factor
        .ok_or_else(|| Error::Hierarchy(format!("level {level} has no coarser level")))?;
    Ok(x.iter().step_by(m).cloned().collect())
}

/// `(R u, A2(R u) + R(g - A1(u)))`.
pub fn fas_coarse_rhs(h: &Hierarchy, level: usize, u: &[State], g: &[State]) -> Result<(Vec<State>, Vec<State>)> {
    check_len(h, level, u.len())?;
    Sequential.restrict(h, level, u, g)
}

/// Forward substitution of the block rows: `u_0 = g_0`,
/// `u_j = Psi(u_{j-1}) + g_j`.
pub fn coarse_solve(h: &Hierarchy, level: usize, u: &mut [State], g: &[State]) -> Result<()> {
    check_len(h, level, u.len())?;
    u[0] = g[0].clone();
    for j in 1..u.len() {
        let mut next = propagate(h, level, j, &u[j - 1])?;
        next.add_assign(&g[j]);
        u[j] = next;
    }
    Ok(())
}

/// Adds `e` at the C-points of `level`, then F-relaxes.
pub fn correct_ideal(h: &Hierarchy, level: usize, u: &mut [State], g: &[State], e: &[State]) -> Result<()> {
    inject_correction(h, level, u, e)?;
    f_relax(h, level, u, g)
}

pub(crate) fn inject_correction(h: &Hierarchy, level: usize, u: &mut [State], e: &[State]) -> Result<()> {
    check_len(h, level, u.len())?;
    let m = h
        .level(level)
        .factor
        .ok_or_else(|| Error::Hierarchy(format!("level {level} has no coarser level")))?;
    check_len(h, level + 1, e.len())?;
    for (k, ek) in e.iter().enumerate() {
        u[k * m].add_assign(ek);
    }
    Ok(())
}

fn check_len(h: &Hierarchy, level: usize, len: usize) -> Result<()> {
    let expected = h.level(level).points();
    if len != expected {
        return Err(Error::Dimension { expected, got: len });
    }
    Ok(())
}
