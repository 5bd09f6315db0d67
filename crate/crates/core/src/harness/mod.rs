//! Configuration, run orchestration and output files for the command-line
//! front end.

mod config;
mod output;
mod run;

pub use config::{
    check_divisible, parse_config, parse_config_str, ExecConfig, OutputConfig, ProblemConfig, RunConfig, SolverConfig,
    TimeConfig, KEYS,
};
pub use output::{
    fields_bytes, history_csv, parse_solution_csv, probe_nodes, solution_csv, SolutionTable, Summary, FIELDS_FILE,
    HISTORY_FILE, HISTORY_HEADER, SOLUTION_FILE, SOLUTION_HEADER, SUMMARY_FILE,
};
pub use run::{
    compare, run, sweep, sweep_csv, sweep_pairs, sweep_table, CompareReport, Mode, RunReport, SweepOutcome, SweepRow,
    SERIES,
};
