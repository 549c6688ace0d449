//! Rotated-word hierarchies.
//!
//! A stage takes the current word `W` of height `h`, cuts `q` copies at
//! the rotation points `α_y`, swaps the two pieces of each copy and glues
//! the copies together, optionally with runs of a spacer symbol between
//! them. `ρ_α(W)[t] = W[(t + α) mod h]`.

mod families;
mod schedule;
mod stats;

pub use families::{
    cat_schedule, morse_schedule, random_rotations, random_schedule, rank_one_schedule, stage_rng, RankOneKind,
    RankOneParams,
};
pub use schedule::{build_word, build_word_with, Hierarchy, Schedule, Stage, DEFAULT_MAX_SYMBOLS};
pub use stats::{subword_distribution, SubwordDistribution};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Ordered set of symbol labels, one of which may be reserved for spacers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AlphabetRepr", into = "AlphabetRepr")]
pub struct Alphabet {
    symbols: Vec<char>,
    spacer_symbol: Option<char>,
}

#[derive(Serialize, Deserialize)]
struct AlphabetRepr {
    symbols: Vec<String>,
    spacer_symbol: Option<String>,
}

fn single_char(s: &str) -> Result<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::Config(format!("symbol label {s:?} must be one character"))),
    }
}

impl TryFrom<AlphabetRepr> for Alphabet {
    type Error = Error;
    fn try_from(r: AlphabetRepr) -> Result<Self> {
        let symbols = r.symbols.iter().map(|s| single_char(s)).collect::<Result<Vec<_>>>()?;
        let spacer = r.spacer_symbol.as_deref().map(single_char).transpose()?;
        Alphabet::new(symbols, spacer)
    }
}

impl From<Alphabet> for AlphabetRepr {
    fn from(a: Alphabet) -> Self {
        AlphabetRepr {
            symbols: a.symbols.iter().map(|c| c.to_string()).collect(),
            spacer_symbol: a.spacer_symbol.map(|c| c.to_string()),
        }
    }
}

impl Alphabet {
    pub fn new(symbols: Vec<char>, spacer_symbol: Option<char>) -> Result<Self> {
        if symbols.len() < 2 {
            return Err(Error::Config("alphabet needs at least two symbols".into()));
        }
        if symbols.len() > u8::MAX as usize {
            return Err(Error::Config("alphabet too large".into()));
        }
        for (i, c) in symbols.iter().enumerate() {
            if symbols[..i].contains(c) {
                return Err(Error::Config(format!("duplicate symbol {c:?}")));
            }
        }
        if let Some(s) = spacer_symbol {
            if !symbols.contains(&s) {
                return Err(Error::Config(format!("spacer {s:?} is not in the alphabet")));
            }
        }
        Ok(Alphabet { symbols, spacer_symbol })
    }

    /// Alphabet made of the distinct characters of `s`, in order of appearance.
    pub fn from_chars(s: &str, spacer_symbol: Option<char>) -> Result<Self> {
        let mut symbols = Vec::new();
        for c in s.chars() {
            if !symbols.contains(&c) {
                symbols.push(c);
            }
        }
        if let Some(sp) = spacer_symbol {
            if !symbols.contains(&sp) {
                symbols.push(sp);
            }
        }
        Alphabet::new(symbols, spacer_symbol)
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn spacer_symbol(&self) -> Option<char> {
        self.spacer_symbol
    }

    pub fn spacer_index(&self) -> Option<u8> {
        self.spacer_symbol.and_then(|s| self.index_of(s))
    }

    pub fn index_of(&self, c: char) -> Option<u8> {
        self.symbols.iter().position(|&x| x == c).map(|i| i as u8)
    }

    pub fn symbol(&self, idx: u8) -> char {
        self.symbols[idx as usize]
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        s.chars()
            .map(|c| {
                self.index_of(c)
                    .ok_or_else(|| Error::Config(format!("symbol {c:?} not in alphabet")))
            })
            .collect::<Result<Vec<_>>>()
            .and_then(Word::new)
    }

    pub fn render(&self, w: &Word) -> String {
        w.symbols.iter().map(|&i| self.symbol(i)).collect()
    }
}

/// A finite word stored as alphabet indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    symbols: Vec<u8>,
}

impl Word {
    pub fn new(symbols: Vec<u8>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::Config("words must be nonempty".into()));
        }
        Ok(Word { symbols })
    }

    pub fn height(&self) -> usize {
        self.symbols.len()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.symbols
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.symbols
    }

    /// Symbol counts indexed by alphabet position.
    pub fn counts(&self, alphabet_len: usize) -> Vec<usize> {
        let mut c = vec![0; alphabet_len];
        for &s in &self.symbols {
            c[s as usize] += 1;
        }
        c
    }
}

/// `ρ_α(W)`: move the first `α` symbols to the end.
pub fn rotate(w: &Word, alpha: usize) -> Result<Word> {
    let h = w.height();
    if alpha > h {
        return Err(Error::Range(format!("rotation {alpha} exceeds word length {h}")));
    }
    let mut out = Vec::with_capacity(h);
    out.extend_from_slice(&w.symbols[alpha..]);
    out.extend_from_slice(&w.symbols[..alpha]);
    Ok(Word { symbols: out })
}

/// One stage of the construction: `ρ_{α_0}(W) 1^{s_0} ρ_{α_1}(W) 1^{s_1} …`.
pub fn concat_stage(w: &Word, st: &Stage, spacer: Option<u8>) -> Result<Word> {
    let h = w.height();
    st.check_shape()?;
    let extra: u64 = st.spacers.iter().sum();
    if extra > 0 && spacer.is_none() {
        return Err(Error::Config("spacers requested but no spacer symbol defined".into()));
    }
    let total = (st.q as u64) * (h as u64) + extra;
    let mut out = Vec::with_capacity(total as usize);
    for y in 0..st.q {
        let a = st.rotations[y] as usize;
        if a >= h {
            return Err(Error::Range(format!("rotation {a} not reduced below height {h}")));
        }
        out.extend_from_slice(&w.symbols[a..]);
        out.extend_from_slice(&w.symbols[..a]);
        if st.spacers[y] > 0 {
            let sp = spacer.expect("checked above");
            out.extend(std::iter::repeat_n(sp, st.spacers[y] as usize));
        }
    }
    Ok(Word { symbols: out })
}
