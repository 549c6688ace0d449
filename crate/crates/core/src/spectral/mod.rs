//! Normalised exponential sums `P(z) = q^{-1/2} Σ_y c_y z^{ω_y}`.
//!
//! Circle grids sample `z = e^{2πik/M}` and are evaluated with one inverse
//! FFT; line grids sample `z = e^{it}` at `M` equispaced `t ∈ [a, b]`.

mod merit;
mod riesz;

pub use merit::merit_factor;
pub use riesz::{riesz_partial_product, word_spectrum, RieszProduct};

use crate::error::{Error, Result};
use crate::words::Schedule;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

#[derive(Debug, Clone, PartialEq)]
pub enum FrequencySet {
    Integer(Vec<i64>),
    Real(Vec<f64>),
}

impl FrequencySet {
    pub fn integer(w: Vec<i64>) -> Result<Self> {
        if w.is_empty() || w.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::ClassViolation("frequencies must be strictly increasing".into()));
        }
        Ok(FrequencySet::Integer(w))
    }

    pub fn real(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|x| !x.is_finite()) || w.windows(2).any(|p| p[0] >= p[1])
        {
            return Err(Error::ClassViolation("frequencies must be strictly increasing".into()));
        }
        Ok(FrequencySet::Real(w))
    }

    pub fn len(&self) -> usize {
        match self {
            FrequencySet::Integer(v) => v.len(),
            FrequencySet::Real(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn span(&self) -> f64 {
        match self {
            FrequencySet::Integer(v) => (v[v.len() - 1] - v[0]) as f64,
            FrequencySet::Real(v) => v[v.len() - 1] - v[0],
        }
    }

    pub fn as_f64(&self) -> Vec<f64> {
        match self {
            FrequencySet::Integer(v) => v.iter().map(|&x| x as f64).collect(),
            FrequencySet::Real(v) => v.clone(),
        }
    }
}

/// `ω(y) = y h_n + Σ_{j<y} s_{n,j}` plus the stage rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct StageFrequencies {
    pub freqs: FrequencySet,
    pub rotations: Vec<u64>,
}

pub fn stage_frequencies(sch: &Schedule, n: usize) -> Result<StageFrequencies> {
    let st = sch
        .stages
        .get(n)
        .ok_or_else(|| Error::Range(format!("stage {n} beyond depth {}", sch.depth())))?;
    let h = sch.heights()[n] as i64;
    let mut acc = 0i64;
    let w = (0..st.q)
        .map(|y| {
            let v = y as i64 * h + acc;
            acc += st.spacers[y] as i64;
            v
        })
        .collect();
    Ok(StageFrequencies { freqs: FrequencySet::integer(w)?, rotations: st.rotations.clone() })
}

/// `ω_y = (n/ε²) e^{εy/n}`, `y = 0, …, n−1`.
pub fn exp_frequency_set(n: usize, eps: f64) -> Result<FrequencySet> {
    if n == 0 || eps.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Parameter("need n >= 1 and eps > 0".into()));
    }
    let nf = n as f64;
    FrequencySet::real((0..n).map(|y| nf / (eps * eps) * (eps * y as f64 / nf).exp()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Grid {
    Circle { m: usize },
    Line { a: f64, b: f64, m: usize },
}

impl Grid {
    pub fn size(&self) -> usize {
        match *self {
            Grid::Circle { m } | Grid::Line { m, .. } => m,
        }
    }

    /// Angle `t` of each sample `z = e^{it}`.
    pub fn angles(&self) -> Vec<f64> {
        match *self {
            Grid::Circle { m } => {
                (0..m).map(|k| std::f64::consts::TAU * k as f64 / m as f64).collect()
            }
            Grid::Line { a, b, m } => {
                if m == 1 {
                    return vec![a];
                }
                (0..m).map(|k| a + (b - a) * k as f64 / (m - 1) as f64).collect()
            }
        }
    }

    fn check(&self) -> Result<()> {
        match *self {
            Grid::Circle { m: 0 } => Err(Error::Parameter("empty grid".into())),
            Grid::Line { a, b, m } if m == 0 || !(a < b) || !a.is_finite() || !b.is_finite() => {
                Err(Error::Parameter(format!("bad line grid [{a}, {b}] with {m} points")))
            }
            _ => Ok(()),
        }
    }

    /// Quadrature weights normalised to sum to one.
    pub fn weights(&self) -> Vec<f64> {
        match *self {
            Grid::Circle { m } => vec![1.0 / m as f64; m],
            Grid::Line { m, .. } => {
                if m == 1 {
                    return vec![1.0];
                }
                let d = 1.0 / (m - 1) as f64;
                (0..m).map(|k| if k == 0 || k == m - 1 { 0.5 * d } else { d }).collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolyClass {
    /// Coefficients all one, integer frequencies.
    M,
    /// Unimodular coefficients.
    K,
    /// Coefficients ±1.
    L,
    /// Coefficients all one, real frequencies.
    MR,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub class: PolyClass,
    pub freqs: FrequencySet,
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(class: PolyClass, freqs: FrequencySet, coeffs: Option<Vec<Complex64>>) -> Result<Self> {
        let q = freqs.len();
        let coeffs = coeffs.unwrap_or_else(|| vec![Complex64::new(1.0, 0.0); q]);
        if coeffs.len() != q {
            return Err(Error::ClassViolation(format!("{} coefficients for {q} frequencies", coeffs.len())));
        }
        let ok = match class {
            PolyClass::M | PolyClass::MR => coeffs.iter().all(|c| *c == Complex64::new(1.0, 0.0)),
            PolyClass::K => coeffs.iter().all(|c| (c.norm() - 1.0).abs() <= 1e-12),
            PolyClass::L => coeffs.iter().all(|c| c.im == 0.0 && c.re.abs() == 1.0),
        };
        if !ok {
            return Err(Error::ClassViolation(format!("coefficients violate class {class:?}")));
        }
        let real = matches!(freqs, FrequencySet::Real(_));
        if real != (class == PolyClass::MR) {
            return Err(Error::ClassViolation("frequency type does not match the class".into()));
        }
        Ok(Polynomial { class, freqs, coeffs })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialGrid {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl PolynomialGrid {
    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    /// Quadrature mean of `|P|²`.
    pub fn mean_power(&self) -> f64 {
        self.grid.weights().iter().zip(&self.values).map(|(w, v)| w * v.norm_sqr()).sum()
    }
}

/// `Σ_y c_y z^{ω_y}` on the grid, without normalisation.
pub fn eval_sparse(freqs: &FrequencySet, coeffs: &[Complex64], grid: &Grid) -> Result<Vec<Complex64>> {
    grid.check()?;
    match (freqs, grid) {
        (FrequencySet::Integer(w), Grid::Circle { m }) => {
            let m = *m;
            let mut buf = vec![Complex64::default(); m];
            for (&f, &c) in w.iter().zip(coeffs) {
                buf[f.rem_euclid(m as i64) as usize] += c;
            }
            FftPlanner::<f64>::new().plan_fft_inverse(m).process(&mut buf);
            Ok(buf)
        }
        _ => {
            let w = freqs.as_f64();
            Ok(grid
                .angles()
                .into_par_iter()
                .map(|t| {
                    w.iter()
                        .zip(coeffs)
                        .map(|(&f, &c)| c * Complex64::from_polar(1.0, (f * t).rem_euclid(std::f64::consts::TAU)))
                        .sum()
                })
                .collect())
        }
    }
}

pub fn eval_polynomial(p: &Polynomial, grid: &Grid) -> Result<PolynomialGrid> {
    let mut values = eval_sparse(&p.freqs, &p.coeffs, grid)?;
    let s = 1.0 / (p.freqs.len() as f64).sqrt();
    values.iter_mut().for_each(|v| *v *= s);
    Ok(PolynomialGrid { grid: *grid, values })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flatness {
    /// `max ||P| − 1|`.
    pub sup: f64,
    /// Mean of `||P| − 1|`.
    pub l1: f64,
    /// Root mean square of `|P|² − 1`.
    pub l2: f64,
}

pub fn flatness_metrics(pg: &PolynomialGrid) -> Result<Flatness> {
    if pg.values.is_empty() {
        return Err(Error::Parameter("empty grid".into()));
    }
    let w = pg.grid.weights();
    let mut out = Flatness { sup: 0.0, l1: 0.0, l2: 0.0 };
    for (v, wt) in pg.values.iter().zip(&w) {
        let a = v.norm();
        out.sup = out.sup.max((a - 1.0).abs());
        out.l1 += wt * (a - 1.0).abs();
        out.l2 += wt * (a * a - 1.0).powi(2);
    }
    out.l2 = out.l2.sqrt();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{rank_one_schedule, RankOneKind, RankOneParams};

    #[test]
    fn staircase_frequencies() {
        let p = RankOneParams { qs: vec![4], seed_word: "000".into(), ..Default::default() };
        let s = rank_one_schedule(RankOneKind::Staircase, &p).unwrap();
        let f = stage_frequencies(&s, 0).unwrap();
        assert_eq!(f.freqs, FrequencySet::Integer(vec![0, 3, 7, 12]));
    }

    #[test]
    fn single_term_is_flat() {
        let p = Polynomial::new(PolyClass::M, FrequencySet::integer(vec![0]).unwrap(), None).unwrap();
        for g in [Grid::Circle { m: 64 }, Grid::Line { a: 1.0, b: 2.0, m: 33 }] {
            let fl = flatness_metrics(&eval_polynomial(&p, &g).unwrap()).unwrap();
            assert!(fl.sup < 1e-12 && fl.l1 < 1e-12 && fl.l2 < 1e-12);
        }
    }

    #[test]
    fn dirichlet_peak() {
        let q = 16;
        let p = Polynomial::new(PolyClass::M, FrequencySet::integer((0..q).collect()).unwrap(), None).unwrap();
        let pg = eval_polynomial(&p, &Grid::Circle { m: 64 }).unwrap();
        assert!((pg.values[0].re - 4.0).abs() < 1e-12);
        assert!(flatness_metrics(&pg).unwrap().sup >= 3.0 - 1e-12);
        assert!((pg.mean_power() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn class_checks() {
        let f = FrequencySet::integer(vec![0, 1]).unwrap();
        let bad = vec![Complex64::new(0.5, 0.0), Complex64::new(1.0, 0.0)];
        assert!(matches!(
            Polynomial::new(PolyClass::K, f.clone(), Some(bad)),
            Err(Error::ClassViolation(_))
        ));
        let i = vec![Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)];
        assert!(Polynomial::new(PolyClass::K, f.clone(), Some(i.clone())).is_ok());
        assert!(Polynomial::new(PolyClass::L, f, Some(i)).is_err());
        assert!(FrequencySet::integer(vec![1, 1]).is_err());
    }

    #[test]
    fn exp_set_start() {
        let f = exp_frequency_set(10, 0.5).unwrap();
        assert_eq!(f.as_f64()[0], 40.0);
        assert!(exp_frequency_set(10, 0.0).is_err());
    }

    #[test]
    fn line_grid_endpoints() {
        let g = Grid::Line { a: 1.0, b: 2.0, m: 5 };
        assert_eq!(g.angles(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
        assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
}
