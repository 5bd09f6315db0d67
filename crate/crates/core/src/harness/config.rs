//! Run configuration: flat `key = value` lines, `#` comments.
//!
//! Keys carry a section prefix (`problem.`, `time.`, `solver.`, `exec.`,
//! `output.`); the bare name after the dot is accepted as well since every
//! bare name is unique.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mgrit::{CycleKind, Hierarchy};
use crate::model::{
    parse_table, CoaxGeometry, EddyCurrentModel, MaterialMap, Mesh1D, PwmSource, Reluctivity, ReluctivitySpline,
};
use crate::stepper::{NewtonConfig, Stepper};

pub const KEYS: &[&str] = &[
    "problem.nodes",
    "problem.r_wire",
    "problem.r_ins",
    "problem.r_out",
    "problem.sigma",
    "problem.nu_table",
    "problem.linear",
    "problem.v0",
    "problem.period",
    "problem.teeth",
    "time.t_end",
    "time.nt",
    "solver.cycle",
    "solver.levels",
    "solver.m",
    "solver.tol",
    "solver.max_iter",
    "solver.newton_atol",
    "solver.newton_rtol",
    "solver.newton_max_iter",
    "solver.newton_damping",
    "exec.workers",
    "exec.deterministic",
    "output.dir",
    "output.dump_fields",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub nodes: usize,
    pub geometry: CoaxGeometry,
    pub sigma: f64,
    /// Reluctivity table for the shield; the bundled curve when absent.
    pub nu_table: Option<PathBuf>,
    /// Freeze the shield reluctivity at its small-field value.
    pub linear: bool,
    pub source: PwmSource,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    pub t_end: f64,
    pub nt: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub cycle: CycleKind,
    pub levels: usize,
    pub m: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub newton: NewtonConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecConfig {
    pub workers: usize,
    /// Residual reductions are always summed in a fixed order; the flag is
    /// kept so configs state the requirement explicitly.
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Also write every fine-level state to `fields.bin`.
    pub dump_fields: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub time: TimeConfig,
    pub solver: SolverConfig,
    pub exec: ExecConfig,
    pub output: OutputConfig,
    /// The file as read, echoed into the run summary.
    pub text: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemConfig {
                nodes: 65,
                geometry: CoaxGeometry::default(),
                sigma: 1.0e7,
                nu_table: None,
                linear: false,
                source: PwmSource::default(),
            },
            time: TimeConfig { t_end: 0.04, nt: 1024 },
            solver: SolverConfig {
                cycle: CycleKind::V,
                levels: 3,
                m: 16,
                tol: 1e-6,
                max_iter: 100,
                newton: NewtonConfig::default(),
            },
            exec: ExecConfig {
                workers: 1,
                deterministic: true,
            },
            output: OutputConfig {
                dir: PathBuf::from("run"),
                dump_fields: false,
            },
            text: String::new(),
        }
    }
}

fn canonical(key: &str) -> Option<&'static str> {
    if key.contains('.') {
        return KEYS.iter().copied().find(|k| *k == key);
    }
    let mut hits = KEYS
        .iter()
        .copied()
        .filter(|k| k.split_once('.').map(|(_, b)| b) == Some(key));
    let first = hits.next()?;
    hits.next().is_none().then_some(first)
}

struct Entries {
    map: BTreeMap<&'static str, (usize, String)>,
}

impl Entries {
    fn parse<T: FromStr>(&self, key: &'static str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.map.get(key) {
            None => Ok(default),
            Some((line, raw)) => raw.parse::<T>().map_err(|e| Error::Config {
                line: *line,
                key: key.into(),
                msg: format!("cannot parse `{raw}`: {e}"),
            }),
        }
    }

    fn flag(&self, key: &'static str, default: bool) -> Result<bool> {
        match self.map.get(key) {
            None => Ok(default),
            Some((line, raw)) => match raw.to_ascii_lowercase().as_str() {
                "true" | "yes" | "on" | "1" => Ok(true),
                "false" | "no" | "off" | "0" => Ok(false),
                _ => Err(Error::Config {
                    line: *line,
                    key: key.into(),
                    msg: format!("expected true or false, got `{raw}`"),
                }),
            },
        }
    }

    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |(l, _)| *l)
    }

    fn fail(&self, key: &str, msg: impl Into<String>) -> Error {
        Error::Config {
            line: self.line(key),
            key: key.into(),
            msg: msg.into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(Error::Config {
                line,
                key: body.into(),
                msg: "expected `key = value`".into(),
            });
        };
        let (k, v) = (k.trim(), v.trim());
        let key = canonical(k).ok_or_else(|| Error::Config {
            line,
            key: k.into(),
            msg: "unknown key".into(),
        })?;
        if v.is_empty() {
            return Err(Error::Config {
                line,
                key: key.into(),
                msg: "missing value".into(),
            });
        }
        if let Some((first, _)) = map.insert(key, (line, v.to_string())) {
            return Err(Error::Config {
                line,
                key: key.into(),
                msg: format!("already set on line {first}"),
            });
        }
    }
    Ok(Entries { map })
}

/// Parses and validates config text. Relative paths resolve against `base`.
pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig> {
    let e = tokenize(text)?;
    let d = RunConfig::default();

    let geometry = CoaxGeometry {
        r_wire: e.parse("problem.r_wire", d.problem.geometry.r_wire)?,
        r_ins: e.parse("problem.r_ins", d.problem.geometry.r_ins)?,
        r_out: e.parse("problem.r_out", d.problem.geometry.r_out)?,
    };
    geometry
        .validate()
        .map_err(|err| e.fail("problem.r_wire", err.to_string()))?;
    let nodes: usize = e.parse("problem.nodes", d.problem.nodes)?;
    if nodes < 4 {
        return Err(e.fail("problem.nodes", "need at least 4 nodes"));
    }
    let sigma: f64 = e.parse("problem.sigma", d.problem.sigma)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(e.fail("problem.sigma", "must be positive"));
    }
    let nu_table = match e.map.get("problem.nu_table") {
        None => None,
        Some((_, p)) => {
            let path = base.join(p);
            if !path.is_file() {
                return Err(e.fail("problem.nu_table", format!("no such file {}", path.display())));
            }
            Some(path)
        }
    };
    let source = PwmSource::new(
        e.parse("problem.v0", d.problem.source.amplitude)?,
        e.parse("problem.period", d.problem.source.period)?,
        e.parse("problem.teeth", d.problem.source.teeth)?,
    )
    .map_err(|err| e.fail("problem.v0", err.to_string()))?;

    let time = TimeConfig {
        t_end: e.parse("time.t_end", d.time.t_end)?,
        nt: e.parse("time.nt", d.time.nt)?,
    };
    if !(time.t_end > 0.0 && time.t_end.is_finite()) {
        return Err(e.fail("time.t_end", "must be positive"));
    }
    if time.nt == 0 {
        return Err(e.fail("time.nt", "need at least one interval"));
    }

    let newton = NewtonConfig {
        atol: e.parse("solver.newton_atol", d.solver.newton.atol)?,
        rtol: e.parse("solver.newton_rtol", d.solver.newton.rtol)?,
        max_iterations: e.parse("solver.newton_max_iter", d.solver.newton.max_iterations)?,
        damping: e.parse("solver.newton_damping", d.solver.newton.damping)?,
        ..d.solver.newton
    };
    newton
        .validate()
        .map_err(|err| e.fail("solver.newton_atol", err.to_string()))?;
    let solver = SolverConfig {
        cycle: e.parse("solver.cycle", d.solver.cycle)?,
        levels: e.parse("solver.levels", d.solver.levels)?,
        m: e.parse("solver.m", d.solver.m)?,
        tol: e.parse("solver.tol", d.solver.tol)?,
        max_iter: e.parse("solver.max_iter", d.solver.max_iter)?,
        newton,
    };
    if solver.levels == 0 {
        return Err(e.fail("solver.levels", "need at least one level"));
    }
    if solver.levels > 1 && solver.m < 2 {
        return Err(e.fail("solver.m", "coarsening factor must be >= 2"));
    }
    if !(solver.tol > 0.0) {
        return Err(e.fail("solver.tol", "must be positive"));
    }
    check_divisible(time.nt, solver.m, solver.levels).map_err(|msg| {
        let key = if e.map.contains_key("time.nt") {
            "time.nt"
        } else {
            "solver.m"
        };
        e.fail(key, msg)
    })?;

    let exec = ExecConfig {
        workers: e.parse("exec.workers", d.exec.workers)?,
        deterministic: e.flag("exec.deterministic", d.exec.deterministic)?,
    };
    if exec.workers == 0 || exec.workers > time.nt + 1 {
        return Err(e.fail("exec.workers", format!("must lie in 1..={}", time.nt + 1)));
    }

    let output = OutputConfig {
        dir: base.join(
            e.map
                .get("output.dir")
                .map_or(d.output.dir.clone(), |(_, v)| PathBuf::from(v)),
        ),
        dump_fields: e.flag("output.dump_fields", d.output.dump_fields)?,
    };

    Ok(RunConfig {
        problem: ProblemConfig {
            nodes,
            geometry,
            sigma,
            nu_table,
            linear: e.flag("problem.linear", d.problem.linear)?,
            source,
        },
        time,
        solver,
        exec,
        output,
        text: text.to_string(),
    })
}

/// `nt` must be divisible by `m^(levels-1)`.
pub fn check_divisible(nt: usize, m: usize, levels: usize) -> std::result::Result<(), String> {
    if levels <= 1 {
        return Ok(());
    }
    let mut block: usize = 1;
    for _ in 1..levels {
        block = block
            .checked_mul(m)
            .ok_or_else(|| format!("m^(L-1) overflows for m = {m}, L = {levels}"))?;
    }
    if !nt.is_multiple_of(block) {
        return Err(format!("{nt} intervals not divisible by m^(L-1) = {block}"));
    }
    Ok(())
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| Error::ConfigFile(format!("cannot read {}: {err}", path.display())))?;
    parse_config_str(&text, path.parent().unwrap_or(Path::new(".")))
}

impl RunConfig {
    pub fn materials(&self) -> Result<MaterialMap> {
        let spline = match &self.problem.nu_table {
            None => ReluctivitySpline::default_soft_iron(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|err| Error::ConfigFile(format!("cannot read {}: {err}", p.display())))?;
                parse_table(&text)?
            }
        };
        let map = MaterialMap::new(self.problem.sigma, Reluctivity::Spline(spline))?;
        Ok(if self.problem.linear { map.linearized() } else { map })
    }

    pub fn model(&self) -> Result<EddyCurrentModel> {
        let mesh = Mesh1D::coax(self.problem.nodes, self.problem.geometry)?;
        EddyCurrentModel::new(mesh, self.materials()?, self.problem.source)
    }

    pub fn stepper(&self) -> Result<Stepper> {
        Ok(Stepper::new(Arc::new(self.model()?), self.solver.newton))
    }

    pub fn hierarchy(&self) -> Result<Hierarchy> {
        Hierarchy::uniform(
            self.stepper()?,
            self.time.t_end,
            self.time.nt,
            self.solver.m,
            self.solver.levels,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        parse_config_str(text, Path::new("/tmp"))
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let c = parse("nt = 1024\nlevels = 3\nm = 8\n").unwrap();
        assert_eq!((c.time.nt, c.solver.levels, c.solver.m), (1024, 3, 8));
        assert_eq!(c.time.t_end, 0.04);
        assert_eq!(c.solver.tol, 1e-6);
        assert_eq!(c.solver.max_iter, 100);
        assert_eq!(c.problem.nodes, 65);
    }

    #[test]
    fn divisibility_error_names_key_and_line() {
        let err = parse("# header\nnt=1000\nm=8\nlevels=3\n").unwrap_err();
        assert_eq!(
            err,
            Error::Config {
                line: 2,
                key: "time.nt".into(),
                msg: "1000 intervals not divisible by m^(L-1) = 64".into()
            }
        );
    }

    #[test]
    fn full_size_config_is_accepted() {
        let c =
            parse("time.nt = 16384\nsolver.m = 64\nsolver.levels = 3\nsolver.tol = 1e-6\nsolver.cycle = F\n").unwrap();
        assert_eq!(c.solver.cycle, CycleKind::F);
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        assert!(matches!(parse("foo = 1"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(parse("time.m = 4"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(
            parse("nt = 64\ntime.nt = 64"),
            Err(Error::Config { line: 2, .. })
        ));
        assert!(matches!(parse("nt 64"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(parse("nt = abc"), Err(Error::Config { line: 1, .. })));
    }

    #[test]
    fn missing_table_file() {
        let err = parse("nu_table = /definitely/not/here.nu").unwrap_err();
        assert!(
            matches!(err, Error::Config { ref key, .. } if key == "problem.nu_table"),
            "{err}"
        );
    }

    #[test]
    fn bare_names_are_unique() {
        for k in KEYS {
            let bare = k.split_once('.').unwrap().1;
            assert_eq!(canonical(bare), Some(*k));
        }
    }
}
