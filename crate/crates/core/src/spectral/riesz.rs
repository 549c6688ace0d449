use super::{eval_sparse, stage_frequencies, FrequencySet, Grid};
use crate::correlation::{lift, LabelMap, LevelFunction};
use crate::error::{Error, Result};
use crate::words::{build_word, Schedule};
use num_complex::Complex64;

/// `|f̂_(n0)|² Π_{n0 ≤ n < n1} |P_n|²` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RieszProduct {
    pub grid: Grid,
    /// `|f̂_(n0)(z)|²`.
    pub weight: Vec<f64>,
    pub product: Vec<f64>,
    /// Grid mean after each additional factor, starting with the weight alone.
    pub masses: Vec<f64>,
}

/// `|Σ_j f(j) z^j|²` on the grid.
pub fn word_spectrum(f: &LevelFunction, grid: &Grid) -> Result<Vec<f64>> {
    let freqs = FrequencySet::Integer((0..f.height() as i64).collect());
    Ok(eval_sparse(&freqs, &f.values, grid)?.iter().map(|v| v.norm_sqr()).collect())
}

pub fn riesz_partial_product(
    sch: &Schedule,
    labels: &LabelMap,
    n0: usize,
    n1: usize,
    grid: &Grid,
) -> Result<RieszProduct> {
    if n1 < n0 || n1 > sch.depth() {
        return Err(Error::Range(format!("stage range {n0}..{n1} outside depth {}", sch.depth())));
    }
    if sch.stages[n0..n1].iter().any(|s| s.rotations.iter().any(|&a| a != 0)) {
        return Err(Error::Unsupported(
            "product form is only available for stages without rotations".into(),
        ));
    }
    let hier = build_word(sch, n0)?;
    let f = lift(labels, &sch.alphabet, &hier.words[n0], n0, false)?;
    let weight = word_spectrum(&f, grid)?;
    let qw = grid.weights();
    let mean = |v: &[f64]| v.iter().zip(&qw).map(|(a, w)| a * w).sum::<f64>();
    let mut product = weight.clone();
    let mut masses = vec![mean(&product)];
    for n in n0..n1 {
        let sf = stage_frequencies(sch, n)?;
        let q = sf.freqs.len();
        let ones = vec![Complex64::new(1.0, 0.0); q];
        let p = eval_sparse(&sf.freqs, &ones, grid)?;
        for (acc, v) in product.iter_mut().zip(&p) {
            *acc *= v.norm_sqr() / q as f64;
        }
        masses.push(mean(&product));
    }
    Ok(RieszProduct { grid: *grid, weight, product, masses })
}
