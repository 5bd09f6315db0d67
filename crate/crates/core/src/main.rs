use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use eddy_mgrit::harness::{self, Mode, RunConfig};
use eddy_mgrit::mgrit::CycleKind;
use eddy_mgrit::Result;

#[derive(Parser)]
#[command(
    name = "eddy-mgrit",
    version,
    about = "MGRIT for a PWM-driven nonlinear eddy-current cable model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve with MGRIT and write the run directory.
    Solve {
        config: PathBuf,
        /// Output directory, overriding `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads, overriding `exec.workers`.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Sequential time stepping on the same grid. Writes to `<output.dir>_baseline`
    /// unless `--out` is given.
    Baseline {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the solution.csv of two run directories.
    Compare {
        dir_a: PathBuf,
        dir_b: PathBuf,
        /// Largest accepted relative difference.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
    /// Iteration counts over (levels, m) pairs and cycle types.
    Sweep {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "V,F")]
        cycles: Vec<CycleKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path, out: Option<PathBuf>) -> Result<RunConfig> {
    let mut cfg = harness::parse_config(path)?;
    if let Some(dir) = out {
        cfg.output.dir = dir;
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve { config, out, workers } => {
            let mut cfg = load(&config, out)?;
            if let Some(w) = workers {
                cfg.exec.workers = w;
            }
            report(harness::run(&cfg, Mode::Mgrit)?)
        }
        Command::Baseline { config, out } => {
            let explicit = out.is_some();
            let mut cfg = load(&config, out)?;
            if !explicit {
                let mut name = cfg.output.dir.clone().into_os_string();
                name.push("_baseline");
                cfg.output.dir = name.into();
            }
            report(harness::run(&cfg, Mode::Baseline)?)
        }
        Command::Compare { dir_a, dir_b, tol } => {
            let rep = harness::compare(&dir_a, &dir_b)?;
            print!("{}", rep.render());
            let ok = rep.within(tol);
            println!("tol={tol:e} {}", if ok { "within" } else { "exceeded" });
            Ok(if ok { 0 } else { 2 })
        }
        Command::Sweep {
            config,
            levels,
            m,
            cycles,
            out,
        } => {
            let cfg = load(&config, out)?;
            let rows = harness::sweep(&cfg, &levels, &m, &cycles)?;
            std::fs::create_dir_all(&cfg.output.dir)?;
            std::fs::write(cfg.output.dir.join("sweep.csv"), harness::sweep_csv(&rows))?;
            print!("{}", harness::sweep_table(&rows));
            Ok(0)
        }
    }
}

fn report(rep: harness::RunReport) -> Result<u8> {
    let r = &rep.result;
    if r.converged {
        println!(
            "converged in {} iterations, residual {:e}, {:.3} s -> {}",
            r.iterations(),
            r.final_residual(),
            rep.total_seconds,
            rep.dir.display()
        );
    } else {
        eprintln!(
            "not converged after {} iterations: initial residual {:e}, final residual {:e}",
            r.iterations(),
            r.initial_residual,
            r.final_residual()
        );
    }
    Ok(rep.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
