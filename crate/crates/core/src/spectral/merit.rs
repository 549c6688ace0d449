use crate::error::{Error, Result};

/// `N² / (2 Σ_{k≥1} c_k²)` with aperiodic autocorrelations
/// `c_k = Σ_j s_j s_{j+k}`; `+∞` when every `c_k` vanishes.
pub fn merit_factor(signs: &[i8]) -> Result<f64> {
    let n = signs.len();
    if n < 2 {
        return Err(Error::Parameter("merit factor needs length >= 2".into()));
    }
    if signs.iter().any(|&s| s != 1 && s != -1) {
        return Err(Error::ClassViolation("merit factor needs a ±1 sequence".into()));
    }
    let mut energy = 0i128;
    for k in 1..n {
        let c: i64 = signs[..n - k].iter().zip(&signs[k..]).map(|(&a, &b)| (a * b) as i64).sum();
        energy += (c as i128) * (c as i128);
    }
    if energy == 0 {
        return Ok(f64::INFINITY);
    }
    Ok((n as f64).powi(2) / (2.0 * energy as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn by_hand() {
        assert_eq!(merit_factor(&[1, 1]).unwrap(), 2.0);
        // c = (-3, 2, -1): 16 / (2 * 14)
        assert!((merit_factor(&[1, -1, 1, -1]).unwrap() - 16.0 / 28.0).abs() < 1e-15);
        assert_eq!(merit_factor(&[1, -1]).unwrap(), 2.0);
        // Barker 13
        let b13 = [1, 1, 1, 1, 1, -1, -1, 1, 1, -1, 1, -1, 1];
        assert!((merit_factor(&b13).unwrap() - 169.0 / 12.0).abs() < 1e-12);
        assert!(merit_factor(&[1]).is_err());
        assert!(merit_factor(&[1, 0]).is_err());
    }
}
