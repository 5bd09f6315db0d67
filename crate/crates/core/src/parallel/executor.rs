use std::ops::Range;
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Mutex;
use std::thread;

use crate::error::{Error, Result};
use crate::mgrit::{c_relax_span, f_relax_span, residual_span, restrict_span, Executor, Hierarchy};
use crate::model::State;

use super::message::Message;
use super::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    FRelax,
    CRelax,
    Residual,
    Restrict,
}

/// What one worker did in one sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub kind: SweepKind,
    pub level: usize,
    pub worker: usize,
    pub range: Range<usize>,
    pub sent: usize,
    /// `(level, time index)` of every state received.
    pub received: Vec<(u32, u32)>,
}

const HUNG_UP: &str = "predecessor exited before sending its boundary state";

struct Link {
    level: usize,
    tx: Option<Sender<Vec<u8>>>,
    rx: Option<Receiver<Vec<u8>>>,
}

struct Ctx {
    links: Vec<Link>,
    sent: usize,
    received: Vec<(u32, u32)>,
}

impl Ctx {
    fn send(&mut self, link: usize, index: usize, state: &State) {
        let l = &self.links[link];
        if let Some(tx) = &l.tx {
            let msg = Message {
                level: l.level as u32,
                index: index as u32,
                state: state.clone(),
            };
            // A successor that already failed reports its own error.
            let _ = tx.send(msg.encode());
            self.sent += 1;
        }
    }

    /// The state at `index` from the predecessor, if there is one.
    fn recv(&mut self, link: usize, index: usize, nodes: usize) -> Result<Option<State>> {
        let l = &self.links[link];
        let Some(rx) = &l.rx else { return Ok(None) };
        let bytes = rx.recv().map_err(|_| Error::Message(HUNG_UP.into()))?;
        let msg = Message::decode(&bytes, Some(nodes))?;
        if msg.level as usize != l.level || msg.index as usize != index {
            return Err(Error::Message(format!(
                "expected state ({}, {index}), got ({}, {})",
                l.level, msg.level, msg.index
            )));
        }
        self.received.push((msg.level, msg.index));
        Ok(Some(msg.state))
    }
}

fn split_mut<'a, T>(mut x: &'a mut [T], ranges: &[Range<usize>]) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(ranges.len());
    for r in ranges {
        let (head, tail) = std::mem::take(&mut x).split_at_mut(r.len());
        out.push(head);
        x = tail;
    }
    out
}

/// Threads exchanging boundary states with their neighbours through
/// channels. Every sweep runs one scoped thread per worker that owns
/// points on the level; states left of a worker's range arrive only as
/// encoded messages.
pub struct Threaded {
    partition: Partition,
    log: Mutex<Vec<SweepRecord>>,
}

impl Threaded {
    pub fn new(partition: Partition) -> Self {
        Threaded {
            partition,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn for_hierarchy(h: &Hierarchy, workers: usize) -> Result<Self> {
        Ok(Self::new(Partition::for_hierarchy(h, workers)?))
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn take_log(&self) -> Vec<SweepRecord> {
        std::mem::take(&mut *self.log.lock().unwrap())
    }

    fn ranges(&self, level: usize, len: usize) -> Result<&[Range<usize>]> {
        if level >= self.partition.depth() {
            return Err(Error::Partition(format!("level {level} is not partitioned")));
        }
        let r = self.partition.ranges(level);
        let expected = r.last().map_or(0, |x| x.end);
        if len != expected {
            return Err(Error::Dimension { expected, got: len });
        }
        Ok(r)
    }

    /// Runs `body` for every worker owning points on `level`. Link `k`
    /// connects consecutive non-empty workers of `chains[k]`.
    fn sweep<P, T, F>(
        &self,
        kind: SweepKind,
        level: usize,
        chains: &[usize],
        parts: Vec<(usize, P)>,
        body: F,
    ) -> Result<Vec<T>>
    where
        P: Send,
        T: Send,
        F: Fn(&mut Ctx, P) -> Result<T> + Sync,
    {
        let w = self.partition.workers();
        let mut links: Vec<Vec<Link>> = (0..w)
            .map(|_| {
                chains
                    .iter()
                    .map(|&level| Link {
                        level,
                        tx: None,
                        rx: None,
                    })
                    .collect()
            })
            .collect();
        for (k, &chain) in chains.iter().enumerate() {
            let active: Vec<usize> = (0..w)
                .filter(|&p| !self.partition.ranges(chain)[p].is_empty())
                .collect();
            for pair in active.windows(2) {
                let (tx, rx) = channel();
                links[pair[0]][k].tx = Some(tx);
                links[pair[1]][k].rx = Some(rx);
            }
        }
        let mut links: Vec<Option<Vec<Link>>> = links.into_iter().map(Some).collect();

        let body = &body;
        let outcomes: Vec<(usize, Result<(T, Ctx)>)> = thread::scope(|s| {
            let handles: Vec<_> = parts
                .into_iter()
                .map(|(worker, part)| {
                    let mut ctx = Ctx {
                        links: links[worker].take().unwrap(),
                        sent: 0,
                        received: Vec::new(),
                    };
                    let handle = s.spawn(move || {
                        let out = body(&mut ctx, part);
                        // Hang up before returning so neighbours never wait on a
                        // finished worker.
                        ctx.links.clear();
                        out.map(|t| (t, ctx))
                    });
                    (worker, handle)
                })
                .collect();
            handles
                .into_iter()
                .map(|(worker, h)| {
                    let r = h
                        .join()
                        .unwrap_or_else(|_| Err(Error::Message("worker thread panicked".into())));
                    (worker, r)
                })
                .collect()
        });

        let mut results = Vec::with_capacity(outcomes.len());
        let mut errors = Vec::new();
        let mut records = Vec::new();
        for (worker, outcome) in outcomes {
            match outcome {
                Ok((t, ctx)) => {
                    records.push(SweepRecord {
                        kind,
                        level,
                        worker,
                        range: self.partition.ranges(level)[worker].clone(),
                        sent: ctx.sent,
                        received: ctx.received,
                    });
                    results.push(t);
                }
                Err(e) => errors.push((worker, e)),
            }
        }
        if !errors.is_empty() {
            let hung = |e: &Error| matches!(e, Error::Message(m) if m == HUNG_UP);
            let pick = errors.iter().position(|(_, e)| !hung(e)).unwrap_or(0);
            let (worker, e) = errors.swap_remove(pick);
            return Err(Error::Worker {
                worker,
                source: Box::new(e),
            });
        }
        self.log.lock().unwrap().extend(records);
        Ok(results)
    }
}

impl Executor for Threaded {
    fn f_relax(&self, h: &Hierarchy, level: usize, u: &mut [State], g: &[State]) -> Result<()> {
        let ranges = self.ranges(level, u.len())?.to_vec();
        let nodes = u[0].nodes();
        let parts: Vec<_> = split_mut(u, &ranges)
            .into_iter()
            .zip(&ranges)
            .enumerate()
            .filter(|(_, (_, r))| !r.is_empty())
            .map(|(w, (uc, r))| (w, (r.clone(), uc, &g[r.clone()])))
            .collect();
        self.sweep(SweepKind::FRelax, level, &[level], parts, |ctx, (r, uc, gc)| {
            let lv = h.level(level);
            let lo = r.start;
            let first = r.clone().find(|&j| lv.is_c_point(j));
            let last = r.clone().rev().find(|&j| lv.is_c_point(j));
            match (first, last) {
                (Some(cf), Some(cl)) => {
                    // Tail interval first so the successor can start early.
                    f_relax_span(h, level, cl, &mut uc[cl - lo..], &gc[cl - lo..], None)?;
                    ctx.send(0, r.end - 1, uc.last().unwrap());
                    f_relax_span(h, level, cf, &mut uc[cf - lo..cl - lo], &gc[cf - lo..cl - lo], None)?;
                    let left = ctx.recv(0, lo.wrapping_sub(1), nodes)?;
                    f_relax_span(h, level, lo, &mut uc[..cf - lo], &gc[..cf - lo], left.as_ref())
                }
                _ => {
                    let left = ctx.recv(0, lo.wrapping_sub(1), nodes)?;
                    f_relax_span(h, level, lo, uc, gc, left.as_ref())?;
                    ctx.send(0, r.end - 1, uc.last().unwrap());
                    Ok(())
                }
            }
        })?;
        Ok(())
    }

    fn c_relax(&self, h: &Hierarchy, level: usize, u: &mut [State], g: &[State]) -> Result<()> {
        let ranges = self.ranges(level, u.len())?.to_vec();
        let nodes = u[0].nodes();
        let parts: Vec<_> = split_mut(u, &ranges)
            .into_iter()
            .zip(&ranges)
            .enumerate()
            .filter(|(_, (_, r))| !r.is_empty())
            .map(|(w, (uc, r))| (w, (r.clone(), uc, &g[r.clone()])))
            .collect();
        self.sweep(SweepKind::CRelax, level, &[level], parts, |ctx, (r, uc, gc)| {
            ctx.send(0, r.end - 1, uc.last().unwrap());
            let left = ctx.recv(0, r.start.wrapping_sub(1), nodes)?;
            c_relax_span(h, level, r.start, uc, gc, left.as_ref())
        })?;
        Ok(())
    }

    fn residual_rows(&self, h: &Hierarchy, level: usize, u: &[State], g: &[State]) -> Result<Vec<f64>> {
        let ranges = self.ranges(level, u.len())?.to_vec();
        let nodes = u[0].nodes();
        let parts: Vec<_> = ranges
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
            .map(|(w, r)| (w, r.clone()))
            .collect();
        let blocks = self.sweep(SweepKind::Residual, level, &[level], parts, |ctx, r| {
            let (uc, gc) = (&u[r.clone()], &g[r.clone()]);
            ctx.send(0, r.end - 1, uc.last().unwrap());
            let left = ctx.recv(0, r.start.wrapping_sub(1), nodes)?;
            Ok(residual_span(h, level, r.start, uc, gc, left.as_ref())?
                .iter()
                .map(State::norm_sq)
                .collect::<Vec<_>>())
        })?;
        Ok(blocks.concat())
    }

    fn restrict(&self, h: &Hierarchy, level: usize, u: &[State], g: &[State]) -> Result<(Vec<State>, Vec<State>)> {
        let ranges = self.ranges(level, u.len())?.to_vec();
        let m = h
            .level(level)
            .factor
            .ok_or_else(|| Error::Hierarchy(format!("level {level} has no coarser level")))?;
        let nodes = u[0].nodes();
        let parts: Vec<_> = ranges
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_empty())
            .map(|(w, r)| (w, r.clone()))
            .collect();
        let blocks = self.sweep(SweepKind::Restrict, level, &[level, level + 1], parts, |ctx, r| {
            let (uc, gc) = (&u[r.clone()], &g[r.clone()]);
            let lo = r.start;
            let coarse = lo.div_ceil(m)..r.end.div_ceil(m);
            ctx.send(0, r.end - 1, uc.last().unwrap());
            if !coarse.is_empty() {
                let k = coarse.end - 1;
                ctx.send(1, k, &uc[k * m - lo]);
            }
            let left_fine = ctx.recv(0, lo.wrapping_sub(1), nodes)?;
            let left_coarse = if coarse.is_empty() {
                None
            } else {
                ctx.recv(1, coarse.start.wrapping_sub(1), nodes)?
            };
            restrict_span(h, level, lo, uc, gc, left_fine.as_ref(), left_coarse.as_ref())
        })?;
        let (mut u2, mut g2) = (Vec::new(), Vec::new());
        for (a, b) in blocks {
            u2.extend(a);
            g2.extend(b);
        }
        Ok((u2, g2))
    }
}
