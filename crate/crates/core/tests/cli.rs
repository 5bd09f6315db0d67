use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eddy_mgrit::harness::{parse_solution_csv, Summary, HISTORY_HEADER, SOLUTION_HEADER};
use eddy_mgrit::parallel::Message;
use tempfile::TempDir;

const SMALL: &str = "\
# small nonlinear run
problem.nodes = 17
time.t_end = 0.04
time.nt = 64
solver.cycle = V
solver.levels = 3
solver.m = 4
solver.tol = 1e-8
solver.max_iter = 40
exec.workers = 1
output.dir = run
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_eddy-mgrit"))
}

/// `SMALL` with the keys set in `extra` replaced and any new keys appended.
fn write_config(dir: &Path, name: &str, extra: &str) -> PathBuf {
    let key = |l: &str| l.split('=').next().unwrap().trim().to_string();
    let overrides: Vec<String> = extra.lines().map(key).collect();
    let mut text = String::new();
    for line in SMALL.lines() {
        if let Some(pos) = overrides.iter().position(|k| *k == key(line)) {
            text.push_str(extra.lines().nth(pos).unwrap());
        } else {
            text.push_str(line);
        }
        text.push('\n');
    }
    for line in extra.lines() {
        if !SMALL.lines().any(|l| key(l) == key(line)) {
            text.push_str(line);
            text.push('\n');
        }
    }
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn summary(dir: &Path) -> Summary {
    Summary::parse(&fs::read_to_string(dir.join("summary.txt")).unwrap())
}

#[test]
fn solve_writes_run_directory() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", "");
    let out = run(&["solve", s(&cfg)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // output.dir is relative to the config file.
    let dir = tmp.path().join("run");
    let sum = summary(&dir);
    assert_eq!(sum.get("converged"), Some("true"));
    assert_eq!(sum.get("mode"), Some("mgrit"));
    assert_eq!(sum.get("level_points"), Some("65,17,5"));
    assert_eq!(sum.get("config.001"), Some("# small nonlinear run"));
    let iters: usize = sum.get("iterations").unwrap().parse().unwrap();
    assert!(iters >= 1);

    let hist = fs::read_to_string(dir.join("residual_history.csv")).unwrap();
    let mut lines = hist.lines();
    assert_eq!(lines.next(), Some(HISTORY_HEADER));
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), iters);
    let last: f64 = rows.last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(last < 1e-8);

    let sol = fs::read_to_string(dir.join("solution.csv")).unwrap();
    assert_eq!(sol.lines().next(), Some(SOLUTION_HEADER));
    let table = parse_solution_csv(&sol).unwrap();
    assert_eq!(table.len(), 65);
    assert_eq!(table.t[0], 0.0);
    assert!((table.t[64] - 0.04).abs() < 1e-15);
    assert!(!dir.join("fields.bin").exists());
}

#[test]
fn unconverged_run_exits_2_with_summary() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", "solver.max_iter = 0\n");
    let out = run(&["solve", s(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    let sum = summary(&tmp.path().join("run"));
    assert_eq!(sum.get("converged"), Some("false"));
    assert_eq!(sum.get("iterations"), Some("0"));
    let r0: f64 = sum.get("initial_residual").unwrap().parse().unwrap();
    assert!(r0 > 0.0);
    assert!(String::from_utf8_lossy(&out.stderr).contains("initial residual"));
}

#[test]
fn baseline_and_compare() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", "");
    assert_eq!(run(&["solve", s(&cfg)]).status.code(), Some(0));
    assert_eq!(run(&["baseline", s(&cfg)]).status.code(), Some(0));
    let (mg, base) = (tmp.path().join("run"), tmp.path().join("run_baseline"));
    assert_eq!(summary(&base).get("mode"), Some("baseline"));
    assert_eq!(summary(&base).get("level_points"), Some("65"));
    let h = fs::read_to_string(base.join("residual_history.csv")).unwrap();
    assert_eq!(h.lines().next(), Some(HISTORY_HEADER));

    let same = run(&["compare", s(&mg), s(&mg)]);
    assert_eq!(same.status.code(), Some(0));
    let text = String::from_utf8_lossy(&same.stdout);
    assert!(text.contains("i: max_abs=0e0 max_rel=0e0"), "{text}");

    let cmp = run(&["compare", s(&mg), s(&base), "--tol", "1e-6"]);
    assert_eq!(cmp.status.code(), Some(0), "{}", String::from_utf8_lossy(&cmp.stdout));
    assert!(String::from_utf8_lossy(&cmp.stdout).contains("within"));

    let strict = run(&["compare", s(&mg), s(&base), "--tol", "0"]);
    assert_eq!(strict.status.code(), Some(2));
}

#[test]
fn compare_rejects_different_grids() {
    let tmp = TempDir::new().unwrap();
    let a = write_config(tmp.path(), "a.cfg", "");
    let b = write_config(tmp.path(), "b.cfg", "time.nt = 32\noutput.dir = other\n");
    assert_eq!(run(&["solve", s(&a)]).status.code(), Some(0));
    assert_eq!(run(&["solve", s(&b)]).status.code(), Some(0));
    let out = run(&["compare", s(&tmp.path().join("run")), s(&tmp.path().join("other"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("time grids differ"));
}

#[test]
fn bad_config_names_key_and_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", "solver.m = 5\n");
    let out = run(&["solve", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("time.nt") && err.contains("line 4"), "{err}");

    let cfg = write_config(tmp.path(), "b.cfg", "solver.speed = 3\n");
    let out = run(&["solve", s(&cfg)]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("solver.speed") && err.contains("line 12"), "{err}");

    let out = run(&["solve", s(&tmp.path().join("missing.cfg"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn solution_bytes_do_not_depend_on_workers_or_reruns() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", "");
    let mut outputs = Vec::new();
    for (name, workers) in [("w1", "1"), ("w1b", "1"), ("w3", "3"), ("w4", "4")] {
        let dir = tmp.path().join(name);
        let out = run(&["solve", s(&cfg), "--out", s(&dir), "--workers", workers]);
        assert_eq!(out.status.code(), Some(0));
        let hist = fs::read_to_string(dir.join("residual_history.csv")).unwrap();
        // Drop the wall-clock column.
        let residuals: Vec<String> = hist
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect();
        outputs.push((fs::read(dir.join("solution.csv")).unwrap(), residuals));
    }
    for o in &outputs[1..] {
        assert!(o == &outputs[0]);
    }
}

#[test]
fn fields_dump_decodes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", "output.dump_fields = true\n");
    assert_eq!(run(&["solve", s(&cfg)]).status.code(), Some(0));
    let dir = tmp.path().join("run");
    let bytes = fs::read(dir.join("fields.bin")).unwrap();
    let msgs = Message::decode_all(&bytes, 17).unwrap();
    assert_eq!(msgs.len(), 65);
    let table = parse_solution_csv(&fs::read_to_string(dir.join("solution.csv")).unwrap()).unwrap();
    for (j, m) in msgs.iter().enumerate() {
        assert_eq!((m.level, m.index as usize), (0, j));
        // solution.csv prints the shortest exact representation.
        assert_eq!(m.state.i, table.i[j]);
        assert_eq!(m.state.a[0], table.probes[0][j]);
    }
}

#[test]
fn sweep_reports_both_cycles() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "a.cfg", "");
    let out = run(&["sweep", s(&cfg), "--levels", "2,3", "--m", "4"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("run").join("sweep.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 4, "{csv}");
    for l in &lines[1..] {
        assert!(l.contains(",true,") || l.ends_with(",true"), "{l}");
    }
    assert!(!String::from_utf8_lossy(&out.stdout).is_empty());

    let bad = run(&["sweep", s(&cfg), "--levels", "2,3", "--m", "4,2,8"]);
    assert_eq!(bad.status.code(), Some(1));
}
