use super::{cyclic_correlation, lift, ls_slope, median, LabelMap};
use crate::error::{Error, Result};
use crate::words::{build_word_with, Schedule};

/// Statistics of `|C_n(t)|` over `t ∈ [h/4, 3h/4]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayStage {
    pub n: usize,
    pub h: u64,
    pub max: f64,
    pub median: f64,
    pub rms: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayProfile {
    pub stages: Vec<DecayStage>,
    /// Slope of `log median` against `log h`; `None` if some median is below `10⁻¹² C(0)`.
    pub median_slope: Option<f64>,
    pub max_slope: Option<f64>,
    /// `(Var_{n+1} / Var_n, 2 h_n / h_{n+1})` per consecutive pair.
    pub variance_ratios: Vec<(f64, f64)>,
}

pub fn decay_profile(
    sch: &Schedule,
    labels: &LabelMap,
    n1: usize,
    n2: usize,
    max_symbols: u64,
) -> Result<DecayProfile> {
    if n2 < n1 + 2 {
        return Err(Error::Precondition("slope fit needs at least three stages".into()));
    }
    if sch.stages.iter().take(n2).any(|s| !s.is_pure()) {
        return Err(Error::Mode("decay profile needs a pure schedule".into()));
    }
    let hier = build_word_with(sch, n2, max_symbols)?;
    let mut stages = Vec::new();
    let mut floor = 0.0f64;
    for n in n1..=n2 {
        let f = lift(labels, &sch.alphabet, &hier.words[n], n, false)?;
        if !f.zero_mean {
            return Err(Error::Precondition(format!("labels are not zero-mean on stage {n}")));
        }
        let c = cyclic_correlation(&f, &f)?;
        floor = floor.max(1e-12 * c.c[0].norm());
        let h = f.height();
        let lo = h.div_ceil(4);
        let hi = 3 * h / 4;
        let win = &c.c[lo..=hi.max(lo)];
        let mut abs: Vec<f64> = win.iter().map(|v| v.norm()).collect();
        let len = abs.len() as f64;
        let max = abs.iter().copied().fold(0.0, f64::max);
        let ms = abs.iter().map(|a| a * a).sum::<f64>() / len;
        let mean = win.iter().sum::<num_complex::Complex64>() / len;
        let variance = (ms - mean.norm_sqr()).max(0.0);
        let med = median(&mut abs);
        stages.push(DecayStage { n, h: h as u64, max, median: med, rms: ms.sqrt(), variance });
    }
    let logh: Vec<f64> = stages.iter().map(|s| (s.h as f64).ln()).collect();
    let fit = |vals: Vec<f64>| {
        vals.iter().all(|&v| v > floor).then(|| {
            let ly: Vec<f64> = vals.iter().map(|v| v.ln()).collect();
            ls_slope(&logh, &ly)
        })
    };
    let median_slope = fit(stages.iter().map(|s| s.median).collect());
    let max_slope = fit(stages.iter().map(|s| s.max).collect());
    let variance_ratios = stages
        .windows(2)
        .map(|w| (w[1].variance / w[0].variance, 2.0 * w[0].h as f64 / w[1].h as f64))
        .collect();
    Ok(DecayProfile { stages, median_slope, max_slope, variance_ratios })
}
