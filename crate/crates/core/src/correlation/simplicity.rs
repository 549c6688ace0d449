//! Approximating `f` by translates of the base indicator.
//!
//! On the depth-`N` cycle, `f(p) = f_(n)(x_n(p))` and
//! `g = Σ_{|j| ≤ H} f_(n)(j) T^j b_n` with `H = (h_n − 1)/2` and `b_n` the
//! indicator of `x_n = 0`. A point is good when the jump-free run of level
//! `n` through it reaches a base point within its centred level `c`, so
//! that `g` reproduces `f` there; `u` is `f` on the bad points and
//! `v = g − f + u` collects what the translates deposit elsewhere.

use super::{lift, LabelMap};
use crate::dynamics::ProjectionChain;
use crate::error::{Error, Result};
use crate::words::{build_word, Schedule, DEFAULT_MAX_SYMBOLS};
use num_complex::Complex64;
use rayon::prelude::*;

#[derive(Debug, Clone, PartialEq)]
pub struct SimplicityReport {
    pub n: usize,
    pub depth: usize,
    pub h: u64,
    pub f_norm2: f64,
    pub g_norm2: f64,
    pub f_minus_g_norm2: f64,
    pub u_norm2: f64,
    pub v_norm2: f64,
    pub uv: Complex64,
    pub fv: Complex64,
    /// Measure of the bad set.
    pub e_fraction: f64,
    /// `max |g − (f − u + v)|`.
    pub identity_residual: f64,
}

#[derive(Default, Clone, Copy)]
struct Acc {
    f: f64,
    g: f64,
    fg: f64,
    u: f64,
    v: f64,
    uv: Complex64,
    fv: Complex64,
    bad: u64,
    resid: f64,
}

impl Acc {
    fn merge(mut self, o: Acc) -> Acc {
        self.f += o.f;
        self.g += o.g;
        self.fg += o.fg;
        self.u += o.u;
        self.v += o.v;
        self.uv += o.uv;
        self.fv += o.fv;
        self.bad += o.bad;
        self.resid = self.resid.max(o.resid);
        self
    }
}

pub fn simplicity_diagnostic(
    sch: &Schedule,
    labels: &LabelMap,
    n: usize,
    depth: usize,
    max_points: u64,
) -> Result<SimplicityReport> {
    if depth < n || depth > sch.depth() {
        return Err(Error::Range(format!("depth {depth} must lie in {n}..={}", sch.depth())));
    }
    if sch.stages[n..depth].iter().any(|s| !s.is_pure()) {
        return Err(Error::Mode("simplicity diagnostic needs pure stages".into()));
    }
    let hs = sch.heights();
    let h = hs[n];
    if h.is_multiple_of(2) {
        return Err(Error::Precondition(format!("h_{n} = {h} must be odd")));
    }
    if h > DEFAULT_MAX_SYMBOLS {
        return Err(Error::Resource(format!("h_{n} = {h} too large")));
    }
    let hier = build_word(sch, n)?;
    let fnv = lift(labels, &sch.alphabet, &hier.words[n], n, false)?;
    if !fnv.zero_mean {
        return Err(Error::Precondition("labels are not zero-mean".into()));
    }
    let fnv = fnv.values;
    let pc = ProjectionChain::new(sch, depth)?;
    let x = pc.level_table_with(n, max_points)?;
    let hn = x.len();
    let h = h as usize;
    let half = (h - 1) / 2;

    // cont[i]: the step i -> i+1 advances level n by exactly one.
    let cont: Vec<bool> =
        (0..hn).map(|i| x[(i + 1) % hn] as usize == (x[i] as usize + 1) % h).collect();
    let good: Vec<bool> = match cont.iter().position(|&c| !c) {
        None => vec![true; hn],
        Some(b0) => {
            let mut back = vec![0u32; hn];
            let mut fwd = vec![0u32; hn];
            let mut i = (b0 + 1) % hn;
            for _ in 1..hn {
                let j = (i + 1) % hn;
                back[j] = if cont[i] { back[i] + 1 } else { 0 };
                i = j;
            }
            let mut i = b0;
            for _ in 1..hn {
                let j = (i + hn - 1) % hn;
                fwd[j] = if cont[j] { fwd[i] + 1 } else { 0 };
                i = j;
            }
            (0..hn)
                .map(|p| {
                    let xv = x[p] as usize;
                    if xv <= half {
                        xv as u32 <= back[p]
                    } else {
                        (h - xv) as u32 <= fwd[p]
                    }
                })
                .collect()
        }
    };

    let mut g = vec![Complex64::default(); hn];
    for z in (0..hn).filter(|&z| x[z] == 0) {
        for j in 0..=half {
            g[(z + j) % hn] += fnv[j];
            if j > 0 {
                g[(z + hn - j) % hn] += fnv[h - j];
            }
        }
    }

    let acc = (0..hn)
        .into_par_iter()
        .fold(Acc::default, |mut a, p| {
            let f = fnv[x[p] as usize];
            let gv = g[p];
            let u = if good[p] { Complex64::default() } else { f };
            let v = gv - f + u;
            a.f += f.norm_sqr();
            a.g += gv.norm_sqr();
            a.fg += (f - gv).norm_sqr();
            a.u += u.norm_sqr();
            a.v += v.norm_sqr();
            a.uv += u * v.conj();
            a.fv += f * v.conj();
            a.bad += (!good[p]) as u64;
            a.resid = a.resid.max((gv - (f - u + v)).norm());
            a
        })
        .reduce(Acc::default, Acc::merge);
    let m = hn as f64;
    Ok(SimplicityReport {
        n,
        depth,
        h: h as u64,
        f_norm2: acc.f / m,
        g_norm2: acc.g / m,
        f_minus_g_norm2: acc.fg / m,
        u_norm2: acc.u / m,
        v_norm2: acc.v / m,
        uv: acc.uv / m,
        fv: acc.fv / m,
        e_fraction: acc.bad as f64 / m,
        identity_residual: acc.resid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::random_schedule;

    fn labels() -> LabelMap {
        LabelMap::parse("C=1,A=root:1/3,T=root:2/3").unwrap()
    }

    #[test]
    fn own_level_reproduces_f() {
        let s = random_schedule(1, &[3, 4], "CAT").unwrap();
        let r = simplicity_diagnostic(&s, &labels(), 1, 1, DEFAULT_MAX_SYMBOLS).unwrap();
        assert!(r.f_minus_g_norm2 < 1e-24);
        assert_eq!(r.u_norm2, 0.0);
        assert!(r.v_norm2 < 1e-24);
    }

    #[test]
    fn one_level_up_balances_exactly() {
        for seed in 0..5 {
            let s = random_schedule(seed, &[3, 200], "CAT").unwrap();
            let r = simplicity_diagnostic(&s, &labels(), 1, 2, DEFAULT_MAX_SYMBOLS).unwrap();
            assert!((r.u_norm2 - r.v_norm2).abs() <= 1e-12 * r.u_norm2, "{r:?}");
            assert!(r.identity_residual < 1e-12);
        }
    }

    #[test]
    fn even_height_refused() {
        let s = random_schedule(0, &[2, 4], "CAT").unwrap();
        assert!(matches!(
            simplicity_diagnostic(&s, &labels(), 1, 2, DEFAULT_MAX_SYMBOLS),
            Err(Error::Precondition(_))
        ));
    }
}
