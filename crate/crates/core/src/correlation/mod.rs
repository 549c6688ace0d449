//! Level functions and their cyclic correlations.
//!
//! `C(t) = (1/h) Σ_j f(j) conj(g(j − t))` on `ℤ_h`, evaluated through the
//! transform identity `C = IDFT(F · conj(G)) / h`.

mod decay;
mod labels;
mod simplicity;

pub use decay::{decay_profile, DecayProfile, DecayStage};
pub use labels::LabelMap;
pub use simplicity::{simplicity_diagnostic, SimplicityReport};

use crate::error::{Error, Result};
use crate::words::{Alphabet, Stage, Word};
use num_complex::Complex64;
use rustfft::FftPlanner;

#[derive(Debug, Clone, PartialEq)]
pub struct LevelFunction {
    pub n: usize,
    pub values: Vec<Complex64>,
    pub zero_mean: bool,
}

impl LevelFunction {
    pub fn new(n: usize, values: Vec<Complex64>) -> Self {
        let zero_mean = is_zero_mean(&values);
        LevelFunction { n, values, zero_mean }
    }

    pub fn height(&self) -> usize {
        self.values.len()
    }

    pub fn norm2(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }
}

fn is_zero_mean(v: &[Complex64]) -> bool {
    let s: Complex64 = v.iter().sum();
    s.norm() <= 1e-12 * v.len() as f64
}

/// `f_(n)(j) = labels(W_n[j])`, zero on spacer levels, optionally centred
/// over the non-spacer levels.
pub fn lift(
    labels: &LabelMap,
    alphabet: &Alphabet,
    w: &Word,
    n: usize,
    subtract_mean: bool,
) -> Result<LevelFunction> {
    let spacer = alphabet.spacer_index();
    let mut table = Vec::with_capacity(alphabet.len());
    for (i, &c) in alphabet.symbols().iter().enumerate() {
        if Some(i as u8) == spacer {
            table.push(None);
            continue;
        }
        let v = labels
            .get(c)
            .ok_or_else(|| Error::Config(format!("no label for symbol {c:?}")))?;
        table.push(Some(v));
    }
    let mut values: Vec<Complex64> =
        w.as_slice().iter().map(|&s| table[s as usize].unwrap_or_default()).collect();
    if subtract_mean {
        let live: Vec<bool> = w.as_slice().iter().map(|&s| Some(s) != spacer).collect();
        let count = live.iter().filter(|&&b| b).count();
        if count > 0 {
            let mean: Complex64 = values.iter().sum::<Complex64>() / count as f64;
            for (v, &l) in values.iter_mut().zip(&live) {
                if l {
                    *v -= mean;
                }
            }
        }
    }
    Ok(LevelFunction::new(n, values))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub n: usize,
    pub c: Vec<Complex64>,
}

impl CorrelationSeries {
    pub fn at(&self, t: i64) -> Complex64 {
        let h = self.c.len() as i64;
        self.c[t.rem_euclid(h) as usize]
    }
}

pub fn cyclic_correlation(f: &LevelFunction, g: &LevelFunction) -> Result<CorrelationSeries> {
    if f.n != g.n || f.height() != g.height() {
        return Err(Error::StageMismatch(f.n, g.n));
    }
    let h = f.height();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(h);
    let inv = planner.plan_fft_inverse(h);
    let mut a = f.values.clone();
    fwd.process(&mut a);
    if std::ptr::eq(f, g) || f.values == g.values {
        for v in a.iter_mut() {
            *v = Complex64::new(v.norm_sqr(), 0.0);
        }
    } else {
        let mut b = g.values.clone();
        fwd.process(&mut b);
        for (x, y) in a.iter_mut().zip(&b) {
            *x *= y.conj();
        }
    }
    inv.process(&mut a);
    let scale = 1.0 / (h as f64 * h as f64);
    for v in a.iter_mut() {
        *v *= scale;
    }
    Ok(CorrelationSeries { n: f.n, c: a })
}

/// One value of the correlation by the defining sum.
pub fn correlation_at(f: &LevelFunction, g: &LevelFunction, t: i64) -> Result<Complex64> {
    if f.n != g.n || f.height() != g.height() {
        return Err(Error::StageMismatch(f.n, g.n));
    }
    let h = f.height();
    let t = t.rem_euclid(h as i64) as usize;
    let mut acc = Complex64::default();
    for j in 0..h {
        acc += f.values[j] * g.values[(j + h - t) % h].conj();
    }
    Ok(acc / h as f64)
}

/// `(1/q) Σ_y C_n(α_y − α_{y−s})` with `y − s` taken mod `q`.
pub fn recursion_rhs(cn: &CorrelationSeries, st: &Stage, s: usize) -> Result<Complex64> {
    if !st.is_pure() {
        return Err(Error::Unsupported("the stage recursion needs a pure stage".into()));
    }
    if s == 0 || s >= st.q {
        return Err(Error::Range(format!("shift {s} outside 1..{}", st.q)));
    }
    let q = st.q;
    let mut acc = Complex64::default();
    for y in 0..q {
        let d = st.rotations[y] as i64 - st.rotations[(y + q - s) % q] as i64;
        acc += cn.at(d);
    }
    Ok(acc / q as f64)
}

/// Median of a slice of finite values (mean of the middle pair for even length).
pub(crate) fn median(v: &mut [f64]) -> f64 {
    let n = v.len();
    assert!(n > 0, "median of empty slice");
    let cmp = |a: &f64, b: &f64| a.total_cmp(b);
    let (_, &mut hi, _) = v.select_nth_unstable_by(n / 2, cmp);
    if n % 2 == 1 {
        hi
    } else {
        let lo = v[..n / 2].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Least-squares slope of `y` against `x`.
pub(crate) fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
