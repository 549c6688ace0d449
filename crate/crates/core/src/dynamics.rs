//! The map on a finite truncation.
//!
//! A point of depth `N` is a position `x_N ∈ ℤ_{h_N}`; the lower
//! coordinates come from the projections
//! `φ_n(y h_n + t) = (t + α_{n,y}) mod h_n` (spacer levels have no image).
//! The map itself is `x_N ↦ x_N + 1 mod h_N`; a level `n` jumps when its
//! coordinate does not simply advance by one.

use crate::error::{Error, Result};
use crate::words::{Hierarchy, Schedule, Stage, Word, DEFAULT_MAX_SYMBOLS};

/// Table marker for positions on spacer levels.
pub const SPACER: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct ProjectionChain {
    heights: Vec<u64>,
    stages: Vec<Stage>,
    /// Copy start offsets, kept only for stages with spacers.
    starts: Vec<Option<Vec<u64>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub next: u64,
    /// `jumps[n]` for levels `0..N`.
    pub jumps: Vec<bool>,
    /// One more than the highest jumping level; all levels from here up advance plainly.
    pub regular_index: usize,
}

impl ProjectionChain {
    pub fn new(sch: &Schedule, depth: usize) -> Result<Self> {
        if depth > sch.depth() {
            return Err(Error::Range(format!("depth {depth} beyond schedule depth {}", sch.depth())));
        }
        let heights: Vec<u64> = sch.heights()[..=depth].to_vec();
        if heights[depth] == u64::MAX {
            return Err(Error::Resource("height overflow".into()));
        }
        let stages = sch.stages[..depth].to_vec();
        let starts = stages
            .iter()
            .enumerate()
            .map(|(n, st)| {
                (!st.is_pure()).then(|| {
                    let mut acc = 0;
                    st.spacers
                        .iter()
                        .map(|&s| {
                            let b = acc;
                            acc += heights[n] + s;
                            b
                        })
                        .collect()
                })
            })
            .collect();
        Ok(ProjectionChain { heights, stages, starts })
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    pub fn heights(&self) -> &[u64] {
        &self.heights
    }

    /// `φ_n` applied to a position of `ℤ_{h_{n+1}}`.
    pub fn phi(&self, n: usize, x: u64) -> Option<u64> {
        let h = self.heights[n];
        let st = &self.stages[n];
        let (y, t) = match &self.starts[n] {
            None => ((x / h) as usize, x % h),
            Some(b) => {
                let y = b.partition_point(|&s| s <= x) - 1;
                let t = x - b[y];
                if t >= h {
                    return None;
                }
                (y, t)
            }
        };
        Some((t + st.rotations[y]) % h)
    }

    pub fn project(&self, x: u64, n: usize) -> Result<Option<u64>> {
        if n > self.depth() {
            return Err(Error::Range(format!("level {n} above depth {}", self.depth())));
        }
        if x >= self.heights[self.depth()] {
            return Err(Error::Range(format!("position {x} outside the truncation")));
        }
        let mut cur = Some(x);
        for m in (n..self.depth()).rev() {
            cur = cur.and_then(|v| self.phi(m, v));
        }
        Ok(cur)
    }

    fn all_levels(&self, x: u64) -> Vec<Option<u64>> {
        let d = self.depth();
        let mut out = vec![None; d + 1];
        out[d] = Some(x);
        for m in (0..d).rev() {
            out[m] = out[m + 1].and_then(|v| self.phi(m, v));
        }
        out
    }

    fn shift(&self, x: u64, forward: bool) -> Result<StepResult> {
        let d = self.depth();
        let hn = self.heights[d];
        if x >= hn {
            return Err(Error::Range(format!("position {x} outside the truncation")));
        }
        let next = if forward { (x + 1) % hn } else { (x + hn - 1) % hn };
        let a = self.all_levels(x);
        let b = self.all_levels(next);
        let jumps: Vec<bool> = (0..d)
            .map(|n| {
                let h = self.heights[n];
                match (a[n], b[n]) {
                    (Some(u), Some(v)) => {
                        let expect = if forward { (u + 1) % h } else { (u + h - 1) % h };
                        v != expect
                    }
                    _ => true,
                }
            })
            .collect();
        let regular_index = jumps.iter().rposition(|&j| j).map_or(0, |i| i + 1);
        Ok(StepResult { next, jumps, regular_index })
    }

    pub fn step(&self, x: u64) -> Result<StepResult> {
        self.shift(x, true)
    }

    pub fn inverse_step(&self, x: u64) -> Result<StepResult> {
        self.shift(x, false)
    }

    /// `x_n` for every position of the truncation, `SPACER` where undefined.
    pub fn level_table(&self, n: usize) -> Result<Vec<u32>> {
        self.level_table_with(n, DEFAULT_MAX_SYMBOLS)
    }

    pub fn level_table_with(&self, n: usize, max_len: u64) -> Result<Vec<u32>> {
        let d = self.depth();
        if n > d {
            return Err(Error::Range(format!("level {n} above depth {d}")));
        }
        let hn = self.heights[d];
        if hn > max_len {
            return Err(Error::Resource(format!("truncation of {hn} points exceeds {max_len}")));
        }
        if hn >= SPACER as u64 {
            return Err(Error::Resource("truncation too large for the level table".into()));
        }
        let mut x: Vec<u32> = (0..hn as u32).collect();
        for m in (n..d).rev() {
            for v in x.iter_mut() {
                if *v != SPACER {
                    *v = self.phi(m, *v as u64).map_or(SPACER, |u| u as u32);
                }
            }
        }
        Ok(x)
    }
}

/// Letters of `W_m` read along `len` forward steps from `start`.
pub fn orbit_coding(
    pc: &ProjectionChain,
    hier: &Hierarchy,
    start: u64,
    len: u64,
    m: usize,
    spacer: Option<u8>,
) -> Result<Word> {
    let hn = pc.heights()[pc.depth()];
    if len == 0 || len > hn {
        return Err(Error::Range(format!("coding length {len} outside 1..={hn}")));
    }
    let wm = hier
        .words
        .get(m)
        .ok_or_else(|| Error::Range(format!("word {m} not in the hierarchy")))?
        .as_slice();
    let mut out = Vec::with_capacity(len as usize);
    for i in 0..len {
        let p = (start + i) % hn;
        match pc.project(p, m)? {
            Some(x) => out.push(wm[x as usize]),
            None => out.push(
                spacer.ok_or_else(|| Error::Config("spacer position without spacer symbol".into()))?,
            ),
        }
    }
    Word::new(out)
}

/// Starts of stage-`m` thin columns, i.e. positions whose `x_{m+1}` is a multiple of `h_m`.
pub fn aligned_positions(pc: &ProjectionChain, m: usize) -> Result<Vec<u64>> {
    if m >= pc.depth() {
        return Err(Error::Range(format!("level {m} must be below depth {}", pc.depth())));
    }
    let hm = pc.heights()[m] as u32;
    let xs = pc.level_table(m + 1)?;
    let q = pc.stages[m].q as u32;
    let starts = pc.starts[m].as_ref();
    Ok(xs
        .iter()
        .enumerate()
        .filter(|(_, &x)| {
            x != SPACER
                && match starts {
                    None => x % hm == 0 && x / hm < q,
                    Some(b) => b.binary_search(&(x as u64)).is_ok(),
                }
        })
        .map(|(p, _)| p as u64)
        .collect())
}

/// Fraction of `K` evenly strided aligned windows of length `h_m` that
/// read as a rotation of `W_m`.
pub fn coverage_statistic(pc: &ProjectionChain, hier: &Hierarchy, m: usize, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Parameter("window count must be positive".into()));
    }
    let aligned = aligned_positions(pc, m)?;
    let top = hier
        .words
        .get(pc.depth())
        .ok_or_else(|| Error::Range("hierarchy shorter than the chain".into()))?
        .as_slice();
    let wm = hier.words[m].as_slice();
    let hm = wm.len();
    let doubled: Vec<u8> = wm.iter().chain(wm.iter()).copied().collect();
    let hn = top.len();
    let k = k.min(aligned.len());
    let mut hits = 0usize;
    let mut win = vec![0u8; hm];
    for i in 0..k {
        let p = aligned[i * aligned.len() / k] as usize;
        for (j, slot) in win.iter_mut().enumerate() {
            *slot = top[(p + j) % hn];
        }
        if doubled.windows(hm).take(hm).any(|w| w == win.as_slice()) {
            hits += 1;
        }
    }
    Ok(hits as f64 / k as f64)
}
