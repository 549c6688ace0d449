use super::Word;
use crate::error::{Error, Result};
use std::collections::BTreeMap;

/// Empirical distribution of the length-`L` windows of a word.
#[derive(Debug, Clone, PartialEq)]
pub struct SubwordDistribution {
    pub len: usize,
    pub windows: usize,
    pub counts: BTreeMap<Vec<u8>, usize>,
}

impl SubwordDistribution {
    pub fn frequency(&self, w: &[u8]) -> f64 {
        self.counts.get(w).copied().unwrap_or(0) as f64 / self.windows as f64
    }

    /// ℓ¹ distance between two distributions of the same window length.
    pub fn l1_distance(&self, other: &SubwordDistribution) -> f64 {
        let mut keys: Vec<&Vec<u8>> = self.counts.keys().chain(other.counts.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.into_iter().map(|k| (self.frequency(k) - other.frequency(k)).abs()).sum()
    }
}

pub fn subword_distribution(w: &Word, len: usize) -> Result<SubwordDistribution> {
    let h = w.height();
    if len == 0 || len > h {
        return Err(Error::Range(format!("window length {len} outside 1..={h}")));
    }
    let mut counts = BTreeMap::new();
    for win in w.as_slice().windows(len) {
        *counts.entry(win.to_vec()).or_insert(0) += 1;
    }
    Ok(SubwordDistribution { len, windows: h - len + 1, counts })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::Alphabet;

    #[test]
    fn catcat_windows() {
        let a = Alphabet::new(vec!['C', 'A', 'T'], None).unwrap();
        let d = subword_distribution(&a.parse_word("CATCAT").unwrap(), 3).unwrap();
        assert_eq!(d.windows, 4);
        assert_eq!(d.frequency(&[0, 1, 2]), 0.5);
        assert_eq!(d.frequency(&[1, 2, 0]), 0.25);
        assert_eq!(d.frequency(&[2, 0, 1]), 0.25);
        let full = subword_distribution(&a.parse_word("CATCAT").unwrap(), 6).unwrap();
        assert_eq!(full.counts.len(), 1);
        assert!(subword_distribution(&a.parse_word("CAT").unwrap(), 4).is_err());
        assert!(subword_distribution(&a.parse_word("CAT").unwrap(), 0).is_err());
    }
}
