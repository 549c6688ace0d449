//! Stage geometry: fat columns, linking permutation, jump statistics, body.
//!
//! Thin column `y` of stage `n` is the copy `ρ_{α_y}(W_n)` inside
//! `W_{n+1}`. Copies sharing a rotation value are merged into one fat
//! column labelled by that value in `ℤ_h`.

use crate::error::{Error, Result};
use crate::words::{Schedule, Stage, DEFAULT_MAX_SYMBOLS};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub struct Iceberg {
    pub h: u64,
    /// Thin-column count per cut value.
    pub counts: BTreeMap<u64, usize>,
    pub q: usize,
    /// False for the spacer variant.
    pub cyclic: bool,
}

impl Iceberg {
    pub fn from_stage(sch: &Schedule, n: usize, allow_spacers: bool) -> Result<Iceberg> {
        let st = sch
            .stages
            .get(n)
            .ok_or_else(|| Error::Range(format!("stage {n} beyond depth {}", sch.depth())))?;
        if !st.is_pure() && !allow_spacers {
            return Err(Error::Mode(format!("stage {n} has spacers")));
        }
        let h = sch.heights()[n];
        Ok(Iceberg::from_rotations(h, &st.rotations, st.is_pure()))
    }

    pub fn from_rotations(h: u64, rotations: &[u64], cyclic: bool) -> Iceberg {
        let mut counts = BTreeMap::new();
        for &a in rotations {
            *counts.entry(a % h).or_insert(0) += 1;
        }
        Iceberg { h, counts, q: rotations.len(), cyclic }
    }

    /// The `q = h` iceberg with one thin column per cut value.
    pub fn uniform(h: u64) -> Iceberg {
        let rot: Vec<u64> = (0..h).collect();
        Iceberg::from_rotations(h, &rot, true)
    }

    pub fn weight(&self, k: u64) -> f64 {
        self.counts.get(&k).copied().unwrap_or(0) as f64 / self.q as f64
    }

    pub fn weights(&self) -> Vec<(u64, f64)> {
        self.counts.iter().map(|(&k, &c)| (k, c as f64 / self.q as f64)).collect()
    }

    /// ℓ¹ distance of the cut histogram to the uniform vector on `ℤ_h`.
    pub fn uniformity_deviation(&self) -> f64 {
        let u = 1.0 / self.h as f64;
        let present: f64 = self.weights().iter().map(|(_, w)| (w - u).abs()).sum();
        present + (self.h - self.counts.len() as u64) as f64 * u
    }
}

/// A bijection of `{0, …, n−1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &x in &map {
            if x >= map.len() || std::mem::replace(&mut seen[x], true) {
                return Err(Error::Precondition("map is not a bijection".into()));
            }
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation { map: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.map[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Self {
        Permutation { map: other.map.iter().map(|&i| self.map[i]).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &x)| i == x)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.map.len()];
        let mut out = Vec::new();
        for s in 0..self.map.len() {
            if seen[s] {
                continue;
            }
            let mut c = vec![s];
            seen[s] = true;
            let mut i = self.map[s];
            while i != s {
                seen[i] = true;
                c.push(i);
                i = self.map[i];
            }
            out.push(c);
        }
        out
    }
}

/// Top of thin column `y` is linked to the bottom of column `y + 1 mod q`.
pub fn poincare_permutation(st: &Stage) -> Permutation {
    Permutation::new((0..st.q).map(|y| (y + 1) % st.q).collect()).expect("cyclic shift")
}

/// Counts of consecutive rotation pairs `(α_y, α_{y+1 mod q})`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpMatrix {
    pub h: u64,
    pub q: usize,
    pub counts: BTreeMap<(u64, u64), usize>,
}

impl JumpMatrix {
    pub fn from_stage(st: &Stage, h: u64) -> Result<JumpMatrix> {
        if !st.is_pure() {
            return Err(Error::Mode("jump matrix needs a pure stage".into()));
        }
        Ok(JumpMatrix::from_rotations(h, &st.rotations))
    }

    pub fn from_rotations(h: u64, rot: &[u64]) -> JumpMatrix {
        let q = rot.len();
        let mut counts = BTreeMap::new();
        for y in 0..q {
            *counts.entry((rot[y] % h, rot[(y + 1) % q] % h)).or_insert(0) += 1;
        }
        JumpMatrix { h, q, counts }
    }

    pub fn row_sums(&self) -> BTreeMap<u64, usize> {
        let mut r = BTreeMap::new();
        for (&(a, _), &c) in &self.counts {
            *r.entry(a).or_insert(0) += c;
        }
        r
    }

    /// `Σ_a w_a Σ_b |N[a][b]/row_a − 1/h|`; rows of weight zero are skipped.
    pub fn uniformity_deviation(&self) -> f64 {
        let u = 1.0 / self.h as f64;
        let rows = self.row_sums();
        let mut total = 0.0;
        let mut it = self.counts.iter().peekable();
        for (&a, &row) in &rows {
            let mut present = 0u64;
            let mut acc = 0.0;
            while let Some((&(ra, _), &c)) = it.peek() {
                if ra != a {
                    break;
                }
                acc += (c as f64 / row as f64 - u).abs();
                present += 1;
                it.next();
            }
            acc += (self.h - present) as f64 * u;
            total += row as f64 / self.q as f64 * acc;
        }
        total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodyReport {
    pub n: usize,
    pub r: usize,
    /// `Q^b_{n,n+r} / Q_{n,n+r}` from the recursion.
    pub lower_bound: f64,
    /// Fraction of stage-`n` thin columns inside `W_{n+r}` untouched by later cuts.
    pub exact_fraction: f64,
    pub intact: u64,
    pub total: u64,
}

/// Recursion `Q^b_{k+1} = (Q^b_k − 1) q_{n+k}`, `Q^b_1 = q_n`, as a fraction of `Q_k`.
pub fn body_lower_bound(qs: &[usize]) -> f64 {
    if qs.is_empty() {
        return 1.0;
    }
    let mut qb: u128 = 0;
    let mut big_q: u128 = 1;
    for (k, &q) in qs.iter().enumerate() {
        let q = q as u128;
        let next = if k == 0 {
            Some((q, q))
        } else {
            qb.saturating_sub(1).checked_mul(q).zip(big_q.checked_mul(q))
        };
        match next {
            Some((b, t)) => {
                qb = b;
                big_q = t;
            }
            None => return body_lower_bound_f64(qs),
        }
    }
    qb as f64 / big_q as f64
}

fn body_lower_bound_f64(qs: &[usize]) -> f64 {
    let mut frac = 1.0f64;
    let mut big_q = 1.0f64;
    for (k, &q) in qs.iter().enumerate() {
        if k > 0 {
            frac = (frac - 1.0 / big_q).max(0.0);
        }
        big_q *= q as f64;
    }
    frac
}

pub fn body_report(sch: &Schedule, n: usize, r: usize) -> Result<BodyReport> {
    if r == 0 || n + r > sch.depth() {
        return Err(Error::Range(format!(
            "look-ahead {r} from stage {n} exceeds depth {}",
            sch.depth()
        )));
    }
    let stages = &sch.stages[n..n + r];
    if stages.iter().any(|s| !s.is_pure()) {
        return Err(Error::Mode("body report needs pure stages".into()));
    }
    let hs = sch.heights();
    if hs[n + r] > DEFAULT_MAX_SYMBOLS {
        return Err(Error::Resource(format!("word of height {} too large", hs[n + r])));
    }
    let qs: Vec<usize> = stages.iter().map(|s| s.q).collect();
    let lower_bound = body_lower_bound(&qs);

    let h = hs[n] as usize;
    let q0 = stages[0].q;
    let mut ids: Vec<u32> = (0..q0 * h).map(|p| (p / h) as u32).collect();
    let mut starts: Vec<bool> = (0..q0 * h).map(|p| p % h == 0).collect();
    let mut cut = vec![false; q0];
    for st in &stages[1..] {
        let len = ids.len();
        let k = cut.len();
        let mut nids = Vec::with_capacity(len * st.q);
        let mut nstarts = Vec::with_capacity(len * st.q);
        let mut ncut = Vec::with_capacity(k * st.q);
        for (y, &a) in st.rotations.iter().enumerate() {
            let a = a as usize;
            let hit = (a > 0 && !starts[a]).then(|| ids[a]);
            ncut.extend(cut.iter().enumerate().map(|(i, &c)| c || hit == Some(i as u32)));
            let base = (y * k) as u32;
            for p in (a..len).chain(0..a) {
                nids.push(base + ids[p]);
                nstarts.push(starts[p]);
            }
        }
        ids = nids;
        starts = nstarts;
        cut = ncut;
    }
    let total = cut.len() as u64;
    let intact = cut.iter().filter(|&&c| !c).count() as u64;
    Ok(BodyReport {
        n,
        r,
        lower_bound,
        exact_fraction: intact as f64 / total as f64,
        intact,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{cat_schedule, morse_schedule};

    #[test]
    fn cat_histogram() {
        let ib = Iceberg::from_stage(&cat_schedule(), 0, false).unwrap();
        assert_eq!(ib.h, 3);
        for k in 0..3 {
            assert!((ib.weight(k) - 2.0 / 6.0).abs() < 1e-15);
        }
        assert!(ib.uniformity_deviation().abs() < 1e-15);
    }

    #[test]
    fn single_column() {
        let ib = Iceberg::from_rotations(4, &[0], true);
        assert_eq!(ib.weights(), vec![(0, 1.0)]);
        assert!((ib.uniformity_deviation() - 1.5).abs() < 1e-15);
        assert!(Iceberg::uniform(7).uniformity_deviation().abs() < 1e-15);
    }

    #[test]
    fn spacer_stage_needs_flag() {
        let p = crate::words::RankOneParams { qs: vec![3], ..Default::default() };
        let s = crate::words::rank_one_schedule(crate::words::RankOneKind::Staircase, &p).unwrap();
        assert!(matches!(Iceberg::from_stage(&s, 0, false), Err(Error::Mode(_))));
        assert!(!Iceberg::from_stage(&s, 0, true).unwrap().cyclic);
    }

    #[test]
    fn poincare_cycle() {
        let p = poincare_permutation(&Stage::pure(vec![0; 6]));
        assert_eq!(p.cycles(), vec![vec![0, 1, 2, 3, 4, 5]]);
        assert!(p.compose(&p.inverse()).is_identity());
        assert!(poincare_permutation(&Stage::pure(vec![0])).is_identity());
        assert!(Permutation::new(vec![0, 0]).is_err());
    }

    #[test]
    fn jump_deviation_by_hand() {
        // α_y = y, q = h = 4: every row has one entry, |1 − 1/4| + 3/4 per row.
        let jm = JumpMatrix::from_rotations(4, &[0, 1, 2, 3]);
        assert!((jm.uniformity_deviation() - 1.5).abs() < 1e-15);
        let single = JumpMatrix::from_rotations(4, &[2]);
        assert_eq!(single.q, 1);
        assert!((single.uniformity_deviation() - 1.5).abs() < 1e-15);
        // Every pair exactly once: conditional rows are uniform.
        let h = 3u64;
        let mut rot = Vec::new();
        // de Bruijn cycle of order 2 on 3 letters
        for c in "001122021".chars() {
            rot.push(c.to_digit(10).unwrap() as u64);
        }
        let jm = JumpMatrix::from_rotations(h, &rot);
        assert!(jm.uniformity_deviation().abs() < 1e-15);
        assert_eq!(jm.row_sums().values().sum::<usize>(), 9);
    }

    #[test]
    fn body_cat() {
        let s = cat_schedule();
        let one = body_report(&s, 0, 1).unwrap();
        assert_eq!((one.exact_fraction, one.lower_bound), (1.0, 1.0));
        let two = body_report(&s, 0, 2).unwrap();
        assert_eq!((two.intact, two.total), (15, 18));
        assert!((two.lower_bound - 15.0 / 18.0).abs() < 1e-15);
        assert!(body_report(&s, 1, 2).is_err());
    }

    #[test]
    fn morse_body_is_full() {
        let s = morse_schedule(3, 5, "ABC").unwrap();
        for r in 1..=4 {
            assert_eq!(body_report(&s, 1, r).unwrap().exact_fraction, 1.0);
        }
    }

    #[test]
    fn recursion_bound_q64() {
        assert!(body_lower_bound(&[64, 64, 64]) >= 0.96);
        assert_eq!(body_lower_bound(&[5]), 1.0);
    }
}
