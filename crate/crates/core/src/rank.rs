//! Local-rank certificates.
//!
//! Fat column `α` occupies the signed levels `[k − h, k − 1]` with
//! `k = α` (or `k = h` when `α = 0`). A set of columns with classes between
//! `k_i` and `k_j` shares `h − (k_j − k_i)` levels, so the best rectangle is
//! found by sweeping windows of sorted classes.

use crate::error::{Error, Result};
use crate::iceberg::Iceberg;
use num_rational::Ratio;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RectangleCertificate {
    /// Cut values of the first and last included fat column.
    pub columns: (u64, u64),
    /// Signed level window.
    pub levels: (i64, i64),
    pub area: f64,
    /// `area = numerator / denominator` exactly.
    pub numerator: u128,
    pub denominator: u128,
}

fn class_of(alpha: u64, h: u64) -> u64 {
    if alpha == 0 {
        h
    } else {
        alpha
    }
}

pub fn best_subtower_rectangle(ib: &Iceberg) -> RectangleCertificate {
    let h = ib.h;
    let mut cols: Vec<(u64, u64)> =
        ib.counts.iter().map(|(&a, &c)| (class_of(a, h), c as u64)).collect();
    cols.sort_unstable();
    let mut best = (0u128, 0usize, 0usize);
    for i in 0..cols.len() {
        let mut w = 0u128;
        for j in i..cols.len() {
            w += cols[j].1 as u128;
            let height = (h - (cols[j].0 - cols[i].0)) as u128;
            let num = w * height;
            if num > best.0 {
                best = (num, i, j);
            }
        }
    }
    let (num, i, j) = best;
    let den = ib.q as u128 * h as u128;
    let (ki, kj) = (cols[i].0, cols[j].0);
    RectangleCertificate {
        columns: (ki % h, kj % h),
        levels: (kj as i64 - h as i64, ki as i64 - 1),
        area: num as f64 / den as f64,
        numerator: num,
        denominator: den,
    }
}

/// `((r+1)/(2r))²` for odd `r`, `r(r+2)/(4r²)` for even `r`.
pub fn beta_morse(r: u64) -> Result<Ratio<u64>> {
    if r < 2 {
        return Err(Error::Parameter("order must be at least 2".into()));
    }
    Ok(if r % 2 == 1 {
        let b = Ratio::new(r + 1, 2 * r);
        b * b
    } else {
        Ratio::new(r * (r + 2), 4 * r * r)
    })
}

pub fn multiplicity_bound(beta: f64) -> Result<u64> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::Parameter(format!("beta = {beta} outside (0, 1]")));
    }
    Ok((1.0 / beta + 1e-12).floor() as u64)
}

/// `m (1 + a² − 2a/√m)`.
pub fn spmult_lemma_rhs(m: u64, a: f64) -> Result<f64> {
    if m < 1 || !(a >= 0.0) {
        return Err(Error::Parameter("need m >= 1 and a >= 0".into()));
    }
    let mf = m as f64;
    Ok(mf * (1.0 + a * a - 2.0 * a / mf.sqrt()))
}

/// Nonzero root of `1 − β/2 = 1 + β − √(2β)`.
pub fn critical_beta() -> f64 {
    let f = |b: f64| (2.0 * b).sqrt() - 1.5 * b;
    let (mut lo, mut hi) = (0.5, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Certificate area minus one level, a lower bound that survives `h → ∞`.
pub fn conservative_beta(cert: &RectangleCertificate, h: u64) -> f64 {
    cert.area - 1.0 / h as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn morse_betas() {
        assert_eq!(beta_morse(3).unwrap(), Ratio::new(4, 9));
        assert_eq!(beta_morse(2).unwrap(), Ratio::new(1, 2));
        assert!(beta_morse(1).is_err());
        let big = beta_morse(10_001).unwrap();
        assert!((*big.numer() as f64 / *big.denom() as f64 - 0.25).abs() < 1e-4);
    }

    #[test]
    fn single_column_is_a_tower() {
        let c = best_subtower_rectangle(&Iceberg::from_rotations(17, &[5, 5], true));
        assert_eq!(c.area, 1.0);
        assert_eq!(c.levels, (-12, 4));
    }

    #[test]
    fn uniform_101() {
        let c = best_subtower_rectangle(&Iceberg::uniform(101));
        assert_eq!((c.numerator, c.denominator), (51 * 51, 101 * 101));
        assert_eq!(multiplicity_bound(conservative_beta(&c, 101)).unwrap(), 4);
    }

    #[test]
    fn scalars() {
        assert_eq!(multiplicity_bound(0.25).unwrap(), 4);
        assert_eq!(multiplicity_bound(1.0).unwrap(), 1);
        assert!(multiplicity_bound(0.0).is_err());
        assert!((spmult_lemma_rhs(2, 1.0).unwrap() - 2.0 * (2.0 - 2f64.sqrt())).abs() < 1e-15);
        let b = critical_beta();
        assert!((b - 8.0 / 9.0).abs() < 1e-12);
        assert!((1.0 - b / 2.0 - (1.0 + b - (2.0 * b).sqrt())).abs() < 1e-12);
        assert!((1.0 - b / 2.0 - 5.0 / 9.0).abs() < 1e-12);
    }
}
