use std::ops::Range;

use crate::error::{Error, Result};
use crate::mgrit::Hierarchy;

/// Contiguous ownership of time points, per level and worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    workers: usize,
    levels: Vec<Vec<Range<usize>>>,
}

/// Balanced contiguous blocks; the first `points % workers` blocks get one
/// extra point.
pub fn balanced_blocks(points: usize, workers: usize) -> Result<Vec<Range<usize>>> {
    if workers == 0 {
        return Err(Error::Partition("need at least one worker".into()));
    }
    if workers > points {
        return Err(Error::Partition(format!("{workers} workers for {points} time points")));
    }
    let (base, extra) = (points / workers, points % workers);
    let mut lo = 0;
    Ok((0..workers)
        .map(|w| {
            let len = base + usize::from(w < extra);
            let r = lo..lo + len;
            lo += len;
            r
        })
        .collect())
}

/// Single-level partition of `points` time points.
pub fn partition(points: usize, workers: usize) -> Result<Partition> {
    Ok(Partition {
        workers,
        levels: vec![balanced_blocks(points, workers)?],
    })
}

impl Partition {
    /// Balanced blocks on the finest level; on coarser levels a worker owns
    /// exactly the images of its C-points.
    pub fn for_hierarchy(h: &Hierarchy, workers: usize) -> Result<Self> {
        let mut levels = vec![balanced_blocks(h.finest().points(), workers)?];
        for lv in &h.levels()[..h.depth() - 1] {
            let m = lv.factor.expect("non-coarsest level has a factor");
            let coarse = levels
                .last()
                .unwrap()
                .iter()
                .map(|r| r.start.div_ceil(m)..r.end.div_ceil(m))
                .collect();
            levels.push(coarse);
        }
        Ok(Partition { workers, levels })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn ranges(&self, level: usize) -> &[Range<usize>] {
        &self.levels[level]
    }

    pub fn sizes(&self, level: usize) -> Vec<usize> {
        self.levels[level].iter().map(|r| r.len()).collect()
    }

    pub fn owner(&self, level: usize, j: usize) -> Option<usize> {
        self.levels[level].iter().position(|r| r.contains(&j))
    }
}
