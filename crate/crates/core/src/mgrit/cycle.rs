use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::State;

use super::hierarchy::Hierarchy;
use super::relax::{coarse_solve, inject_correction, Executor};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleKind {
    V,
    F,
}

impl FromStr for CycleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "V" | "v" => Ok(CycleKind::V),
            "F" | "f" => Ok(CycleKind::F),
            other => Err(Error::ConfigFile(format!("unknown cycle `{other}`, expected V or F"))),
        }
    }
}

impl fmt::Display for CycleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CycleKind::V => "V",
            CycleKind::F => "F",
        })
    }
}

/// Sum in a fixed binary tree over the index range, so the result depends
/// only on the values and their order.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 8 {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

/// Space-time residual norm from per-row squared norms; the initial
/// condition row is excluded.
pub fn residual_norm(rows: &[f64]) -> f64 {
    pairwise_sum(rows.get(1..).unwrap_or(&[])).sqrt()
}

/// Recursive cycles over one hierarchy, counting level visits.
pub struct Cycler<'a> {
    h: &'a Hierarchy,
    exec: &'a dyn Executor,
    visits: Vec<usize>,
}

impl<'a> Cycler<'a> {
    pub fn new(h: &'a Hierarchy, exec: &'a dyn Executor) -> Self {
        Cycler {
            h,
            exec,
            visits: vec![0; h.depth()],
        }
    }

    /// Number of times each level has been entered.
    pub fn visits(&self) -> &[usize] {
        &self.visits
    }

    pub fn v_cycle(&mut self, level: usize, u: &mut [State], g: &[State]) -> Result<()> {
        self.cycle(level, CycleKind::V, u, g, false)
    }

    pub fn f_cycle(&mut self, level: usize, u: &mut [State], g: &[State]) -> Result<()> {
        self.cycle(level, CycleKind::F, u, g, false)
    }

    pub fn run(&mut self, kind: CycleKind, u: &mut [State], g: &[State]) -> Result<()> {
        self.cycle(0, kind, u, g, false)
    }

    // `relaxed` means u was just F-relaxed with the current C-point values,
    // so the leading F-sweep would reproduce it and is skipped.
    fn cycle(&mut self, level: usize, kind: CycleKind, u: &mut [State], g: &[State], relaxed: bool) -> Result<()> {
        self.visits[level] += 1;
        let (h, exec) = (self.h, self.exec);
        if level + 1 == h.depth() {
            return coarse_solve(h, level, u, g);
        }
        if !relaxed {
            exec.f_relax(h, level, u, g)?;
        }
        exec.c_relax(h, level, u, g)?;
        exec.f_relax(h, level, u, g)?;

        let (u2, g2) = exec.restrict(h, level, u, g)?;
        let mut v = u2.clone();
        self.cycle(level + 1, kind, &mut v, &g2, false)?;
        let e: Vec<State> = v.iter().zip(&u2).map(|(a, b)| a.sub(b)).collect();
        inject_correction(h, level, u, &e)?;
        exec.f_relax(h, level, u, g)?;

        if kind == CycleKind::F && level > 0 {
            self.cycle(level, CycleKind::V, u, g, true)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub cycle: CycleKind,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            cycle: CycleKind::V,
            tol: 1e-6,
            max_iter: 100,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub converged: bool,
    pub u: Vec<State>,
    pub initial_residual: f64,
    /// Residual norm after each cycle.
    pub history: Vec<f64>,
    /// Wall-clock seconds of each cycle including its residual evaluation.
    pub cycle_seconds: Vec<f64>,
    pub visits: Vec<usize>,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.history.last().copied().unwrap_or(self.initial_residual)
    }

    /// Each cycle's residual strictly below the previous cycle's.
    pub fn monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[1] < w[0])
    }
}

/// Fine-level right-hand side: `g_0 = u0`, zero elsewhere.
pub fn initial_rhs(h: &Hierarchy, u0: &State) -> Vec<State> {
    let mut g = vec![State::zeros(u0.nodes()); h.finest().points()];
    g[0] = u0.clone();
    g
}

/// Iterates cycles from the constant-in-time guess `u_j = u0`.
pub fn solve(h: &Hierarchy, exec: &dyn Executor, u0: &State, opts: SolveOptions) -> Result<SolveResult> {
    let g = initial_rhs(h, u0);
    let init = vec![u0.clone(); h.finest().points()];
    solve_from(h, exec, &g, init, opts)
}

/// Iterates cycles on `A(u) = g` from the iterate `u`.
pub fn solve_from(
    h: &Hierarchy,
    exec: &dyn Executor,
    g: &[State],
    mut u: Vec<State>,
    opts: SolveOptions,
) -> Result<SolveResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::ConfigFile(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let n = h.finest().points();
    for len in [g.len(), u.len()] {
        if len != n {
            return Err(Error::Dimension { expected: n, got: len });
        }
    }
    let initial_residual = residual_norm(&exec.residual_rows(h, 0, &u, g)?);
    let mut cycler = Cycler::new(h, exec);
    let mut history = Vec::new();
    let mut cycle_seconds = Vec::new();
    let mut converged = initial_residual < opts.tol;
    while !converged && history.len() < opts.max_iter {
        let start = Instant::now();
        cycler.run(opts.cycle, &mut u, g)?;
        let r = residual_norm(&exec.residual_rows(h, 0, &u, g)?);
        cycle_seconds.push(start.elapsed().as_secs_f64());
        history.push(r);
        converged = r < opts.tol;
    }
    Ok(SolveResult {
        converged,
        u,
        initial_residual,
        history,
        cycle_seconds,
        visits: cycler.visits().to_vec(),
    })
}
