//! Time-parallel execution: each worker owns a contiguous block of time
//! points on every level and receives the state just left of its block
//! from its predecessor, once per sweep.

mod executor;
mod message;
mod partition;

pub use executor::{SweepKind, SweepRecord, Threaded};
pub use message::Message;
pub use partition::{balanced_blocks, partition, Partition};

use crate::error::Result;
use crate::mgrit::{solve, Hierarchy, SolveOptions, SolveResult};
use crate::model::State;

/// MGRIT from the constant-in-time guess on `workers` threads.
pub fn run_parallel(h: &Hierarchy, u0: &State, opts: SolveOptions, workers: usize) -> Result<SolveResult> {
    let exec = Threaded::for_hierarchy(h, workers)?;
    solve(h, &exec, u0, opts)
}
