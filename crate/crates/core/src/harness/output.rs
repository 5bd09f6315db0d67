//! Run artefacts: residual history, probe time series, summary, field dump.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mgrit::SolveResult;
use crate::model::{Mesh1D, State};
use crate::parallel::Message;

pub const HISTORY_FILE: &str = "residual_history.csv";
pub const SOLUTION_FILE: &str = "solution.csv";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const FIELDS_FILE: &str = "fields.bin";

pub const HISTORY_HEADER: &str = "iter,residual_norm,wall_seconds";
pub const SOLUTION_HEADER: &str = "t,i,a_probe0,a_probe1,a_probe2";

/// Probe nodes: wire center, inner shield surface, shield middle.
pub fn probe_nodes(mesh: &Mesh1D) -> [usize; 3] {
    let g = mesh.geometry();
    [
        0,
        mesh.node_at_or_after(g.r_ins),
        mesh.node_at_or_after(0.5 * (g.r_ins + g.r_out)),
    ]
}

/// `wall_seconds` is cumulative since the first cycle started.
pub fn history_csv(result: &SolveResult) -> String {
    let mut out = format!("{HISTORY_HEADER}\n");
    let mut wall = 0.0;
    for (k, (r, dt)) in result.history.iter().zip(&result.cycle_seconds).enumerate() {
        wall += dt;
        writeln!(out, "{},{:e},{:.6}", k + 1, r, wall).unwrap();
    }
    out
}

pub fn solution_csv(times: &[f64], u: &[State], probes: [usize; 3]) -> String {
    let mut out = format!("{SOLUTION_HEADER}\n");
    for (t, s) in times.iter().zip(u) {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e}",
            t, s.i, s.a[probes[0]], s.a[probes[1]], s.a[probes[2]]
        )
        .unwrap();
    }
    out
}

/// Columns of a `solution.csv`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolutionTable {
    pub t: Vec<f64>,
    pub i: Vec<f64>,
    pub probes: [Vec<f64>; 3],
}

impl SolutionTable {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

pub fn parse_solution_csv(text: &str) -> Result<SolutionTable> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SOLUTION_HEADER => {}
        Some((_, h)) => return Err(Error::Csv(format!("unexpected header `{h}`"))),
        None => return Err(Error::Csv("empty file".into())),
    }
    let mut table = SolutionTable::default();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Csv(format!(
                "line {}: {} fields, expected 5",
                n + 1,
                fields.len()
            )));
        }
        let mut v = [0.0; 5];
        for (slot, f) in v.iter_mut().zip(&fields) {
            *slot = f
                .trim()
                .parse()
                .map_err(|_| Error::Csv(format!("line {}: `{f}` is not a number", n + 1)))?;
        }
        table.t.push(v[0]);
        table.i.push(v[1]);
        for p in 0..3 {
            table.probes[p].push(v[2 + p]);
        }
    }
    Ok(table)
}

/// Fine-level states as consecutive message payloads, level 0.
pub fn fields_bytes(u: &[State]) -> Vec<u8> {
    let mut out = Vec::new();
    for (j, s) in u.iter().enumerate() {
        Message {
            level: 0,
            index: j as u32,
            state: s.clone(),
        }
        .write_to(&mut out);
    }
    out
}

/// `key=value` lines, in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Appends the config verbatim, one `config.NNN=` entry per line.
    pub fn push_config(&mut self, text: &str) {
        for (n, line) in text.lines().enumerate() {
            self.push(&format!("config.{:03}", n + 1), line);
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn parse(text: &str) -> Summary {
        Summary {
            entries: text
                .lines()
                .filter_map(|l| l.split_once('='))
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }
}

pub fn write(dir: &Path, name: &str, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), bytes)?;
    Ok(())
}
