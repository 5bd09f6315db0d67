use crate::error::{Error, Result};
use crate::stepper::Stepper;

/// One temporal grid. Points are uniform with step `dt`; every
/// `factor`-th point is a C-point and becomes a point of the next level.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeLevel {
    pub index: usize,
    pub times: Vec<f64>,
    pub dt: f64,
    /// Coarsening factor to the next level; `None` on the coarsest level.
    pub factor: Option<usize>,
}

impl TimeLevel {
    pub fn points(&self) -> usize {
        self.times.len()
    }

    pub fn intervals(&self) -> usize {
        self.times.len() - 1
    }

    pub fn is_c_point(&self, j: usize) -> bool {
        match self.factor {
            Some(m) => j.is_multiple_of(m),
            None => true,
        }
    }

    /// C-point indices in increasing order.
    pub fn c_points(&self) -> impl Iterator<Item = usize> + '_ {
        let m = self.factor.unwrap_or(1);
        (0..self.points()).step_by(m)
    }
}

/// Temporal grid hierarchy, finest first, with the shared backward-Euler
/// propagator. Each level steps with its own `dt`.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    levels: Vec<TimeLevel>,
    stepper: Stepper,
}

impl Hierarchy {
    /// Uniform factor `m` on all `levels` levels over `(0, t_end]` with
    /// `intervals` fine steps.
    pub fn uniform(stepper: Stepper, t_end: f64, intervals: usize, m: usize, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Hierarchy("need at least one level".into()));
        }
        if levels > 1 && m < 2 {
            return Err(Error::Hierarchy(format!("coarsening factor must be >= 2, got {m}")));
        }
        Self::with_factors(stepper, t_end, intervals, &vec![m; levels - 1])
    }

    /// One factor per coarsening; the hierarchy has `factors.len() + 1`
    /// levels.
    pub fn with_factors(stepper: Stepper, t_end: f64, intervals: usize, factors: &[usize]) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(Error::Hierarchy(format!("t_end must be positive, got {t_end}")));
        }
        if intervals == 0 {
            return Err(Error::Hierarchy("need at least one time interval".into()));
        }
        let fine: Vec<f64> = (0..=intervals).map(|j| j as f64 * t_end / intervals as f64).collect();
        let mut levels = vec![TimeLevel {
            index: 0,
            times: fine,
            dt: t_end / intervals as f64,
            factor: None,
        }];
        for (l, &m) in factors.iter().enumerate() {
            let prev = levels.last_mut().unwrap();
            if m < 2 {
                return Err(Error::Hierarchy(format!("coarsening factor must be >= 2, got {m}")));
            }
            if !prev.intervals().is_multiple_of(m) {
                return Err(Error::Hierarchy(format!(
                    "level {l} has {} intervals, not divisible by m = {m}",
                    prev.intervals()
                )));
            }
            prev.factor = Some(m);
            let times: Vec<f64> = prev.times.iter().step_by(m).copied().collect();
            let n = times.len() - 1;
            levels.push(TimeLevel {
                index: l + 1,
                times,
                dt: t_end / n as f64,
                factor: None,
            });
        }
        Ok(Hierarchy { levels, stepper })
    }

    pub fn levels(&self) -> &[TimeLevel] {
        &self.levels
    }

    pub fn level(&self, l: usize) -> &TimeLevel {
        &self.levels[l]
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn stepper(&self) -> &Stepper {
        &self.stepper
    }

    pub fn finest(&self) -> &TimeLevel {
        &self.levels[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::EddyCurrentModel;
    use crate::stepper::NewtonConfig;
    use std::sync::Arc;

    fn stepper() -> Stepper {
        Stepper::new(Arc::new(EddyCurrentModel::default_cable()), NewtonConfig::default())
    }

    #[test]
    fn table_one_grid_sizes() {
        let h = Hierarchy::uniform(stepper(), 0.04, 1 << 14, 64, 3).unwrap();
        let counts: Vec<usize> = h.levels().iter().map(|l| l.points()).collect();
        assert_eq!(counts, vec![16385, 257, 5]);
        assert_eq!(h.level(2).intervals(), 4);
    }

    #[test]
    fn c_points_and_transfer_compatibility() {
        let h = Hierarchy::uniform(stepper(), 1.0, 16, 4, 2).unwrap();
        assert_eq!(h.level(0).c_points().collect::<Vec<_>>(), vec![0, 4, 8, 12, 16]);
        for (k, c) in h.level(0).c_points().enumerate() {
            assert_eq!(h.level(1).times[k].to_bits(), h.level(0).times[c].to_bits());
        }
        assert!((h.level(1).dt - 4.0 * h.level(0).dt).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_factors() {
        assert!(Hierarchy::uniform(stepper(), 1.0, 8, 1, 2).is_err());
        assert!(Hierarchy::uniform(stepper(), 1.0, 1000, 8, 3).is_err());
        assert!(Hierarchy::uniform(stepper(), 1.0, 1024, 8, 3).is_ok());
        assert!(Hierarchy::with_factors(stepper(), 1.0, 48, &[4, 3]).is_ok());
    }

    #[test]
    fn single_level_is_plain_time_stepping() {
        let h = Hierarchy::uniform(stepper(), 0.04, 10, 1, 1).unwrap();
        assert_eq!(h.depth(), 1);
        assert!(h.level(0).is_c_point(3));
    }
}
