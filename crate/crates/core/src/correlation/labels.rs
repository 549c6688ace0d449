use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Complex value attached to each alphabet symbol.
///
/// Text form: `C=1,A=0.5-2i,T=root:2/3`, where `root:k/m` is `e^{2πik/m}`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabelMap {
    map: BTreeMap<char, Complex64>,
}

impl LabelMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, c: char, v: Complex64) {
        self.map.insert(c, v);
    }

    pub fn get(&self, c: char) -> Option<Complex64> {
        self.map.get(&c).copied()
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut out = LabelMap::new();
        for item in s.split(',').map(str::trim).filter(|x| !x.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("label {item:?} is not symbol=value")))?;
            let mut chars = k.trim().chars();
            let c = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => return Err(Error::Config(format!("label key {k:?} must be one character"))),
            };
            out.insert(c, parse_value(v.trim())?);
        }
        Ok(out)
    }
}

fn parse_value(v: &str) -> Result<Complex64> {
    if let Some(rest) = v.strip_prefix("root:") {
        let (k, m) = rest
            .split_once('/')
            .ok_or_else(|| Error::Config(format!("bad root label {v:?}")))?;
        let k: i64 = k.parse().map_err(|_| Error::Config(format!("bad root label {v:?}")))?;
        let m: i64 = m.parse().map_err(|_| Error::Config(format!("bad root label {v:?}")))?;
        if m <= 0 {
            return Err(Error::Config(format!("root order must be positive in {v:?}")));
        }
        return Ok(Complex64::from_polar(1.0, TAU * k as f64 / m as f64));
    }
    v.parse::<Complex64>().map_err(|_| Error::Config(format!("bad label value {v:?}")))
}
