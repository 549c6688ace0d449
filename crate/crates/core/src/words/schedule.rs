use super::{concat_stage, Alphabet, Word};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Largest word built without an explicit override.
pub const DEFAULT_MAX_SYMBOLS: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub q: usize,
    pub rotations: Vec<u64>,
    pub spacers: Vec<u64>,
}

impl Stage {
    pub fn new(q: usize, rotations: Vec<u64>, spacers: Vec<u64>) -> Result<Self> {
        let st = Stage { q, rotations, spacers };
        st.check_shape()?;
        Ok(st)
    }

    /// Stage without spacers.
    pub fn pure(rotations: Vec<u64>) -> Self {
        let q = rotations.len();
        Stage { q, rotations, spacers: vec![0; q] }
    }

    pub(crate) fn check_shape(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::Config("stage needs q >= 1".into()));
        }
        if self.rotations.len() != self.q || self.spacers.len() != self.q {
            return Err(Error::Config(format!(
                "stage with q = {} has {} rotations and {} spacers",
                self.q,
                self.rotations.len(),
                self.spacers.len()
            )));
        }
        Ok(())
    }

    pub fn is_pure(&self) -> bool {
        self.spacers.iter().all(|&s| s == 0)
    }

    pub fn spacer_total(&self) -> u64 {
        self.spacers.iter().sum()
    }

    pub fn next_height(&self, h: u64) -> u64 {
        self.q as u64 * h + self.spacer_total()
    }
}

/// Complete construction data: every experiment starts from one of these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRepr", into = "ScheduleRepr")]
pub struct Schedule {
    pub alphabet: Alphabet,
    pub seed_word: Word,
    pub stages: Vec<Stage>,
    pub family_tag: String,
    pub rng_seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleRepr {
    alphabet: Alphabet,
    seed_word: String,
    stages: Vec<Stage>,
    family_tag: String,
    rng_seed: Option<u64>,
}

impl TryFrom<ScheduleRepr> for Schedule {
    type Error = Error;
    fn try_from(r: ScheduleRepr) -> Result<Self> {
        let w = r.alphabet.parse_word(&r.seed_word)?;
        Schedule::new(r.alphabet, w, r.stages, r.family_tag, r.rng_seed)
    }
}

impl From<Schedule> for ScheduleRepr {
    fn from(s: Schedule) -> Self {
        ScheduleRepr {
            seed_word: s.alphabet.render(&s.seed_word),
            alphabet: s.alphabet,
            stages: s.stages,
            family_tag: s.family_tag,
            rng_seed: s.rng_seed,
        }
    }
}

impl Schedule {
    /// Validates stage shapes and reduces every rotation mod the height it acts on.
    pub fn new(
        alphabet: Alphabet,
        seed_word: Word,
        mut stages: Vec<Stage>,
        family_tag: impl Into<String>,
        rng_seed: Option<u64>,
    ) -> Result<Self> {
        if seed_word.as_slice().iter().any(|&i| i as usize >= alphabet.len()) {
            return Err(Error::Config("seed word uses an index outside the alphabet".into()));
        }
        let mut h = seed_word.height() as u64;
        for st in stages.iter_mut() {
            st.check_shape()?;
            if st.spacer_total() > 0 && alphabet.spacer_symbol().is_none() {
                return Err(Error::Config("spacer stage without a spacer symbol".into()));
            }
            for a in st.rotations.iter_mut() {
                *a %= h;
            }
            h = st
                .q
                .checked_mul(h as usize)
                .map(|x| x as u64 + st.spacer_total())
                .ok_or_else(|| Error::Resource("height overflow".into()))?;
        }
        Ok(Schedule { alphabet, seed_word, stages, family_tag: family_tag.into(), rng_seed })
    }

    pub fn depth(&self) -> usize {
        self.stages.len()
    }

    /// `h_0, …, h_depth`, saturating on overflow.
    pub fn heights(&self) -> Vec<u64> {
        let mut hs = vec![self.seed_word.height() as u64];
        for st in &self.stages {
            let h = *hs.last().unwrap();
            let next = (st.q as u64)
                .checked_mul(h)
                .and_then(|x| x.checked_add(st.spacer_total()))
                .unwrap_or(u64::MAX);
            hs.push(next);
        }
        hs
    }

    pub fn is_pure(&self) -> bool {
        self.stages.iter().all(Stage::is_pure)
    }

    /// Partial products of `h_{n+1} / (q_n h_n)`.
    pub fn measure_partial_products(&self) -> Vec<f64> {
        let hs = self.heights();
        let mut acc = 1.0;
        self.stages
            .iter()
            .enumerate()
            .map(|(n, st)| {
                acc *= hs[n + 1] as f64 / (st.q as f64 * hs[n] as f64);
                acc
            })
            .collect()
    }

    /// Refuses schedules whose spacer mass pushes the partial products past `cap`.
    pub fn check_finite_measure(&self, cap: f64) -> Result<Vec<f64>> {
        let pp = self.measure_partial_products();
        if let Some((n, v)) = pp.iter().enumerate().find(|(_, v)| **v > cap) {
            return Err(Error::Parameter(format!(
                "measure partial product {v} at stage {n} exceeds cap {cap}"
            )));
        }
        Ok(pp)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Hex sha256 of the compact JSON form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }

    /// Copy restricted to the first `depth` stages.
    pub fn truncated(&self, depth: usize) -> Schedule {
        let mut s = self.clone();
        s.stages.truncate(depth);
        s
    }
}

/// `W_0, …, W_N` together with their heights.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    pub words: Vec<Word>,
    pub heights: Vec<u64>,
}

impl Hierarchy {
    pub fn top(&self) -> &Word {
        self.words.last().expect("hierarchy is never empty")
    }
}

pub fn build_word(sch: &Schedule, n: usize) -> Result<Hierarchy> {
    build_word_with(sch, n, DEFAULT_MAX_SYMBOLS)
}

/// Builds the hierarchy through stage `n`, refusing words longer than `max_symbols`.
pub fn build_word_with(sch: &Schedule, n: usize, max_symbols: u64) -> Result<Hierarchy> {
    if n > sch.depth() {
        return Err(Error::Range(format!("stage {n} beyond schedule depth {}", sch.depth())));
    }
    let heights: Vec<u64> = sch.heights().into_iter().take(n + 1).collect();
    if let Some(&h) = heights.iter().find(|&&h| h > max_symbols) {
        return Err(Error::Resource(format!(
            "word of {h} symbols exceeds the limit of {max_symbols}"
        )));
    }
    let spacer = sch.alphabet.spacer_index();
    let mut words = vec![sch.seed_word.clone()];
    for st in &sch.stages[..n] {
        let next = concat_stage(words.last().unwrap(), st, spacer)?;
        words.push(next);
    }
    Ok(Hierarchy { words, heights })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::cat_schedule;

    #[test]
    fn cat_heights_and_words() {
        let s = cat_schedule();
        let hi = build_word(&s, 2).unwrap();
        assert_eq!(hi.heights, vec![3, 18, 54]);
        assert_eq!(s.alphabet.render(&hi.words[1]), "CATATCTCATCACATATC");
        assert_eq!(build_word(&s, 0).unwrap().words.len(), 1);
        assert!(matches!(build_word(&s, 3), Err(Error::Range(_))));
    }

    #[test]
    fn rotations_are_reduced() {
        let a = Alphabet::new(vec!['C', 'A', 'T'], None).unwrap();
        let w = a.parse_word("CAT").unwrap();
        let s = Schedule::new(a, w, vec![Stage::pure(vec![3, 4, 5])], "custom", None).unwrap();
        assert_eq!(s.stages[0].rotations, vec![0, 1, 2]);
    }

    #[test]
    fn json_round_trip() {
        let s = cat_schedule();
        let j = s.to_json();
        assert!(j.starts_with("{\"alphabet\":{\"symbols\":[\"C\",\"A\",\"T\"]"));
        assert!(j.contains("\"seed_word\":\"CAT\""));
        let back = Schedule::from_json(&j).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.hash(), s.hash());
        assert_eq!(s.hash().len(), 64);
    }

    #[test]
    fn size_limit() {
        let s = cat_schedule();
        assert!(matches!(build_word_with(&s, 2, 50), Err(Error::Resource(_))));
        assert!(build_word_with(&s, 2, 54).is_ok());
    }

    #[test]
    fn finite_measure_cap() {
        let a = Alphabet::new(vec!['0', '1'], Some('1')).unwrap();
        let w = a.parse_word("0").unwrap();
        let st = Stage::new(2, vec![0, 0], vec![0, 5]).unwrap();
        let s = Schedule::new(a, w, vec![st], "custom", None).unwrap();
        let pp = s.measure_partial_products();
        assert!((pp[0] - 3.5).abs() < 1e-12);
        assert!(s.check_finite_measure(3.0).is_err());
        assert!(s.check_finite_measure(4.0).is_ok());
    }
}
