use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::mgrit::{solve, CycleKind, Executor, Hierarchy, Sequential, SolveOptions, SolveResult};
use crate::parallel::Threaded;

use super::config::{check_divisible, RunConfig};
use super::output::{self, Summary};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Mgrit,
    /// Sequential time stepping, i.e. a single-level hierarchy.
    Baseline,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub mode: Mode,
    pub dir: PathBuf,
    pub result: SolveResult,
    pub total_seconds: f64,
    pub summary: Summary,
}

impl RunReport {
    /// 0 when converged, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.result.converged {
            0
        } else {
            2
        }
    }
}

fn solve_with(h: &Hierarchy, cfg: &RunConfig, opts: SolveOptions) -> Result<SolveResult> {
    let u0 = h.stepper().model().zero_state();
    let threaded;
    let exec: &dyn Executor = if cfg.exec.workers > 1 {
        threaded = Threaded::for_hierarchy(h, cfg.exec.workers)?;
        &threaded
    } else {
        &Sequential
    };
    solve(h, exec, &u0, opts)
}

/// Solves and writes the run directory.
pub fn run(cfg: &RunConfig, mode: Mode) -> Result<RunReport> {
    let levels = match mode {
        Mode::Mgrit => cfg.solver.levels,
        Mode::Baseline => 1,
    };
    let stepper = cfg.stepper()?;
    let h = Hierarchy::uniform(stepper, cfg.time.t_end, cfg.time.nt, cfg.solver.m, levels)?;
    let opts = SolveOptions {
        cycle: cfg.solver.cycle,
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
    };
    let start = Instant::now();
    let result = solve_with(&h, cfg, opts)?;
    let total_seconds = start.elapsed().as_secs_f64();

    let model = h.stepper().model();
    let probes = output::probe_nodes(model.mesh());
    let dir = cfg.output.dir.clone();
    output::write(&dir, output::HISTORY_FILE, output::history_csv(&result))?;
    output::write(
        &dir,
        output::SOLUTION_FILE,
        output::solution_csv(&h.finest().times, &result.u, probes),
    )?;
    if cfg.output.dump_fields {
        output::write(&dir, output::FIELDS_FILE, output::fields_bytes(&result.u))?;
    }

    let mut s = Summary::default();
    s.push("mode", if mode == Mode::Mgrit { "mgrit" } else { "baseline" });
    s.push("converged", result.converged);
    s.push("iterations", result.iterations());
    s.push("initial_residual", format!("{:e}", result.initial_residual));
    s.push("final_residual", format!("{:e}", result.final_residual()));
    s.push("monotone", result.monotone());
    s.push("total_wall_seconds", format!("{total_seconds:.6}"));
    s.push("cycle", cfg.solver.cycle);
    s.push("levels", levels);
    s.push("m", cfg.solver.m);
    s.push("nt", cfg.time.nt);
    s.push("t_end", cfg.time.t_end);
    s.push("workers", cfg.exec.workers);
    s.push("deterministic", cfg.exec.deterministic);
    s.push("tol", format!("{:e}", cfg.solver.tol));
    let points: Vec<String> = h.levels().iter().map(|l| l.points().to_string()).collect();
    s.push("level_points", points.join(","));
    let visits: Vec<String> = result.visits.iter().map(|v| v.to_string()).collect();
    s.push("level_visits", visits.join(","));
    let radii: Vec<String> = probes
        .iter()
        .map(|&p| format!("{:e}", model.mesh().radii()[p]))
        .collect();
    s.push("probe_radii", radii.join(","));
    s.push_config(&cfg.text);
    output::write(&dir, output::SUMMARY_FILE, s.render())?;

    Ok(RunReport {
        mode,
        dir,
        result,
        total_seconds,
        summary: s,
    })
}

/// Maximum absolute and relative differences of two runs' probe series.
/// Relative differences are `max|a - b| / max|b|` per series.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub rows: usize,
    /// Series order: i, a_probe0, a_probe1, a_probe2.
    pub abs: [f64; 4],
    pub rel: [f64; 4],
}

pub const SERIES: [&str; 4] = ["i", "a_probe0", "a_probe1", "a_probe2"];

impl CompareReport {
    pub fn max_rel(&self) -> f64 {
        self.rel.iter().fold(0.0, |m, &x| m.max(x))
    }

    pub fn within(&self, tol: f64) -> bool {
        self.rel.iter().all(|&r| r <= tol)
    }

    pub fn render(&self) -> String {
        let mut out = format!("rows={}\n", self.rows);
        for (k, name) in SERIES.iter().enumerate() {
            writeln!(out, "{name}: max_abs={:e} max_rel={:e}", self.abs[k], self.rel[k]).unwrap();
        }
        out
    }
}

pub fn compare(dir_a: &Path, dir_b: &Path) -> Result<CompareReport> {
    let read = |d: &Path| -> Result<output::SolutionTable> {
        let path = d.join(output::SOLUTION_FILE);
        let text =
            std::fs::read_to_string(&path).map_err(|e| Error::Csv(format!("cannot read {}: {e}", path.display())))?;
        output::parse_solution_csv(&text)
    };
    let (a, b) = (read(dir_a)?, read(dir_b)?);
    if a.len() != b.len() {
        return Err(Error::Csv(format!(
            "time grids differ: {} vs {} rows",
            a.len(),
            b.len()
        )));
    }
    let t_scale = b.t.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for (k, (ta, tb)) in a.t.iter().zip(&b.t).enumerate() {
        if (ta - tb).abs() > 1e-12 * t_scale {
            return Err(Error::Csv(format!("time grids differ at row {k}: {ta} vs {tb}")));
        }
    }
    let series = |t: &output::SolutionTable| {
        [
            t.i.clone(),
            t.probes[0].clone(),
            t.probes[1].clone(),
            t.probes[2].clone(),
        ]
    };
    let (sa, sb) = (series(&a), series(&b));
    let mut abs = [0.0; 4];
    let mut rel = [0.0; 4];
    for k in 0..4 {
        let diff = sa[k].iter().zip(&sb[k]).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
        let scale = sb[k].iter().fold(0.0f64, |m, y| m.max(y.abs()));
        abs[k] = diff;
        rel[k] = if scale > 0.0 { diff / scale } else { diff };
    }
    Ok(CompareReport {
        rows: a.len(),
        abs,
        rel,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cycle: CycleKind,
    pub levels: usize,
    pub m: usize,
    /// `None` when `nt` is not divisible by `m^(levels-1)`.
    pub outcome: Option<SweepOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub wall_seconds: f64,
}

/// Pairs `levels[k]` with `ms[k]`; a single entry in either list is reused
/// for every entry of the other.
pub fn sweep_pairs(levels: &[usize], ms: &[usize]) -> Result<Vec<(usize, usize)>> {
    let n = levels.len().max(ms.len());
    let ok = |len: usize| len == n || len == 1;
    if levels.is_empty() || ms.is_empty() || !ok(levels.len()) || !ok(ms.len()) {
        return Err(Error::ConfigFile(format!(
            "cannot pair {} level counts with {} factors",
            levels.len(),
            ms.len()
        )));
    }
    Ok((0..n)
        .map(|k| (levels[k.min(levels.len() - 1)], ms[k.min(ms.len() - 1)]))
        .collect())
}

pub fn sweep(cfg: &RunConfig, levels: &[usize], ms: &[usize], cycles: &[CycleKind]) -> Result<Vec<SweepRow>> {
    let pairs = sweep_pairs(levels, ms)?;
    let stepper = cfg.stepper()?;
    let mut rows = Vec::new();
    for &cycle in cycles {
        for &(l, m) in &pairs {
            if l == 0 || (l > 1 && m < 2) || check_divisible(cfg.time.nt, m, l).is_err() {
                rows.push(SweepRow {
                    cycle,
                    levels: l,
                    m,
                    outcome: None,
                });
                continue;
            }
            let h = Hierarchy::uniform(stepper.clone(), cfg.time.t_end, cfg.time.nt, m, l)?;
            let opts = SolveOptions {
                cycle,
                tol: cfg.solver.tol,
                max_iter: cfg.solver.max_iter,
            };
            let start = Instant::now();
            let r = solve_with(&h, cfg, opts)?;
            rows.push(SweepRow {
                cycle,
                levels: l,
                m,
                outcome: Some(SweepOutcome {
                    iterations: r.iterations(),
                    converged: r.converged,
                    final_residual: r.final_residual(),
                    wall_seconds: start.elapsed().as_secs_f64(),
                }),
            });
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("cycle,levels,m,iterations,converged,final_residual,wall_seconds\n");
    for r in rows {
        match &r.outcome {
            Some(o) => writeln!(
                out,
                "{},{},{},{},{},{:e},{:.6}",
                r.cycle, r.levels, r.m, o.iterations, o.converged, o.final_residual, o.wall_seconds
            ),
            None => writeln!(out, "{},{},{},,invalid,,", r.cycle, r.levels, r.m),
        }
        .unwrap();
    }
    out
}

/// Iteration counts with one row per cycle type and one column per
/// `(levels, m)` pair; `-` marks invalid pairs and `*` non-convergence.
pub fn sweep_table(rows: &[SweepRow]) -> String {
    let mut columns: Vec<(usize, usize)> = Vec::new();
    for r in rows {
        if !columns.contains(&(r.levels, r.m)) {
            columns.push((r.levels, r.m));
        }
    }
    let mut out = format!("{:<6}", "cycle");
    for (l, m) in &columns {
        write!(out, "{:>12}", format!("L={l},m={m}")).unwrap();
    }
    out.push('\n');
    let mut cycles: Vec<CycleKind> = Vec::new();
    for r in rows {
        if !cycles.contains(&r.cycle) {
            cycles.push(r.cycle);
        }
    }
    for c in cycles {
        write!(out, "{:<6}", c.to_string()).unwrap();
        for col in &columns {
            let cell =
                rows.iter()
                    .find(|r| r.cycle == c && (r.levels, r.m) == *col)
                    .map_or("".to_string(), |r| match &r.outcome {
                        None => "-".into(),
                        Some(o) if o.converged => o.iterations.to_string(),
                        Some(o) => format!("{}*", o.iterations),
                    });
            write!(out, "{cell:>12}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs() {
        assert_eq!(
            sweep_pairs(&[3, 4, 5], &[16, 8, 4]).unwrap(),
            vec![(3, 16), (4, 8), (5, 4)]
        );
        assert_eq!(sweep_pairs(&[3], &[4, 8]).unwrap(), vec![(3, 4), (3, 8)]);
        assert!(sweep_pairs(&[3, 4], &[4, 8, 16]).is_err());
        assert!(sweep_pairs(&[], &[4]).is_err());
    }
}
