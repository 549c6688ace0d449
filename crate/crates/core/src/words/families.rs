//! Named schedule generators.
//!
//! Random families draw stage `n` from a ChaCha stream keyed by
//! `(seed, n)`, so any single stage can be regenerated on its own.

use super::{Alphabet, Schedule, Stage};
use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Generator for stage `stage` of a run seeded with `seed`.
pub fn stage_rng(seed: u64, stage: usize) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stage as u64);
    rng
}

/// The three-letter example: `CAT`, then `q = 6` with `α = (0,1,2,2,0,1)`,
/// then `q = 3` with `α = (7,4,11)`.
pub fn cat_schedule() -> Schedule {
    let a = Alphabet::new(vec!['C', 'A', 'T'], None).unwrap();
    let w = a.parse_word("CAT").unwrap();
    let stages = vec![Stage::pure(vec![0, 1, 2, 2, 0, 1]), Stage::pure(vec![7, 4, 11])];
    Schedule::new(a, w, stages, "cat", None).unwrap()
}

/// Order-`r` Morse family: `q = r`, `α_y = y h_n / r`.
pub fn morse_schedule(r: usize, depth: usize, seed_word: &str) -> Result<Schedule> {
    if r < 2 {
        return Err(Error::Parameter("morse order must be at least 2".into()));
    }
    if depth < 1 {
        return Err(Error::Parameter("morse depth must be at least 1".into()));
    }
    let alphabet = Alphabet::from_chars(seed_word, None)?;
    let w = alphabet.parse_word(seed_word)?;
    if w.height() % r != 0 {
        return Err(Error::Precondition(format!(
            "seed word length {} not divisible by r = {r}",
            w.height()
        )));
    }
    let mut h = w.height() as u64;
    let mut stages = Vec::with_capacity(depth);
    for _ in 0..depth {
        let step = h / r as u64;
        stages.push(Stage::pure((0..r as u64).map(|y| y * step).collect()));
        h = h.checked_mul(r as u64).ok_or_else(|| Error::Resource("height overflow".into()))?;
    }
    Schedule::new(alphabet, w, stages, format!("morse-{r}"), None)
}

/// `q` i.i.d. uniform draws on `{0, …, h − 1}` from stream `stage` of `seed`.
pub fn random_rotations(seed: u64, stage: usize, h: u64, q: usize) -> Vec<u64> {
    let mut rng = stage_rng(seed, stage);
    (0..q).map(|_| rng.gen_range(0..h)).collect()
}

/// I.i.d. uniform rotations on `{0, …, h_n − 1}`.
pub fn random_schedule(seed: u64, qs: &[usize], seed_word: &str) -> Result<Schedule> {
    if let Some(q) = qs.iter().find(|&&q| q < 2) {
        return Err(Error::Parameter(format!("random stages need q >= 2, got {q}")));
    }
    let alphabet = Alphabet::from_chars(seed_word, None)?;
    let w = alphabet.parse_word(seed_word)?;
    let mut h = w.height() as u64;
    let mut stages = Vec::with_capacity(qs.len());
    for (n, &q) in qs.iter().enumerate() {
        stages.push(Stage::pure(random_rotations(seed, n, h, q)));
        h = h.checked_mul(q as u64).ok_or_else(|| Error::Resource("height overflow".into()))?;
    }
    Schedule::new(alphabet, w, stages, "random", Some(seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RankOneKind {
    Ornstein,
    Staircase,
}

#[derive(Debug, Clone)]
pub struct RankOneParams {
    pub qs: Vec<usize>,
    /// Ornstein bound `α_max = h_n / ratio`.
    pub ratio: u64,
    pub seed: u64,
    pub seed_word: String,
    pub symbols: Vec<char>,
    pub spacer: char,
}

impl Default for RankOneParams {
    fn default() -> Self {
        RankOneParams {
            qs: vec![2, 2, 2],
            ratio: 4,
            seed: 0,
            seed_word: "0".into(),
            symbols: vec!['0', '1'],
            spacer: '1',
        }
    }
}

/// Tower stacking with spacers and no rotations.
///
/// Staircase: `s_y = y`. Ornstein: draw `q` values uniformly on
/// `[0, h_n / ratio]`, sort them and take consecutive differences, with
/// no spacers after the last copy.
pub fn rank_one_schedule(kind: RankOneKind, p: &RankOneParams) -> Result<Schedule> {
    if p.qs.contains(&0) {
        return Err(Error::Parameter("q must be positive".into()));
    }
    if kind == RankOneKind::Ornstein && p.ratio == 0 {
        return Err(Error::Parameter("ornstein ratio must be positive".into()));
    }
    let alphabet = Alphabet::new(p.symbols.clone(), Some(p.spacer))?;
    let w = alphabet.parse_word(&p.seed_word)?;
    let mut h = w.height() as u64;
    let mut stages = Vec::with_capacity(p.qs.len());
    for (n, &q) in p.qs.iter().enumerate() {
        let spacers: Vec<u64> = match kind {
            RankOneKind::Staircase => (0..q as u64).collect(),
            RankOneKind::Ornstein => {
                let amax = h / p.ratio;
                let mut rng = stage_rng(p.seed, n);
                let mut draws: Vec<u64> = (0..q).map(|_| rng.gen_range(0..=amax)).collect();
                draws.sort_unstable();
                let mut s: Vec<u64> = draws.windows(2).map(|d| d[1] - d[0]).collect();
                s.push(0);
                s
            }
        };
        let st = Stage::new(q, vec![0; q], spacers)?;
        h = st.next_height(h);
        stages.push(st);
    }
    let tag = match kind {
        RankOneKind::Ornstein => "ornstein",
        RankOneKind::Staircase => "staircase",
    };
    let seed = (kind == RankOneKind::Ornstein).then_some(p.seed);
    Schedule::new(alphabet, w, stages, tag, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::build_word;

    #[test]
    fn morse_words() {
        let s = morse_schedule(2, 3, "01").unwrap();
        let hi = build_word(&s, 2).unwrap();
        assert_eq!(s.alphabet.render(&hi.words[1]), "0110");
        assert_eq!(s.alphabet.render(&hi.words[2]), "01101001");
        let s3 = morse_schedule(3, 1, "ABC").unwrap();
        assert_eq!(s3.alphabet.render(build_word(&s3, 1).unwrap().top()), "ABCBCACAB");
        assert!(matches!(morse_schedule(3, 2, "01"), Err(Error::Precondition(_))));
    }

    #[test]
    fn random_is_reproducible_and_in_range() {
        let a = random_schedule(7, &[6], "CAT").unwrap();
        assert!(a.stages[0].rotations.iter().all(|&x| x < 3));
        assert_eq!(a, random_schedule(7, &[6], "CAT").unwrap());
        assert_ne!(a, random_schedule(8, &[6], "CAT").unwrap());
        assert!(random_schedule(7, &[1], "CAT").is_err());
    }

    #[test]
    fn staircase_spacers() {
        let p = RankOneParams { qs: vec![4], ..Default::default() };
        let s = rank_one_schedule(RankOneKind::Staircase, &p).unwrap();
        assert_eq!(s.stages[0].spacers, vec![0, 1, 2, 3]);
        assert!(s.stages[0].rotations.iter().all(|&a| a == 0));
    }

    #[test]
    fn ornstein_spacers_are_nonnegative_differences() {
        let p = RankOneParams {
            qs: vec![3, 5, 7],
            ratio: 2,
            seed: 11,
            seed_word: "0000".into(),
            ..Default::default()
        };
        let s = rank_one_schedule(RankOneKind::Ornstein, &p).unwrap();
        let hs = s.heights();
        for (n, st) in s.stages.iter().enumerate() {
            assert_eq!(*st.spacers.last().unwrap(), 0);
            assert!(st.spacer_total() <= hs[n] / 2);
        }
    }

    #[test]
    fn ornstein_with_zero_range_is_pure_stacking() {
        let p = RankOneParams { qs: vec![3, 3], ratio: 10, ..Default::default() };
        let s = rank_one_schedule(RankOneKind::Ornstein, &p).unwrap();
        assert!(s.is_pure());
        assert_eq!(s.heights(), vec![1, 3, 9]);
    }
}
