use super::output::OutDir;
use super::{Cli, Command, Ctx, Experiment, Source, SpectrumMode};
use crate::correlation::{
    correlation_at, cyclic_correlation, decay_profile, lift, recursion_rhs, simplicity_diagnostic,
    LabelMap,
};
use crate::error::{Error, Result};
use crate::iceberg::{body_report, Iceberg, JumpMatrix};
use crate::rank::{beta_morse, best_subtower_rectangle};
use crate::spectral::{
    eval_polynomial, exp_frequency_set, flatness_metrics, merit_factor, riesz_partial_product,
    word_spectrum, Grid, PolyClass, Polynomial,
};
use crate::words::{build_word_with, random_rotations, random_schedule, Schedule};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

pub(crate) fn dispatch(cli: &Cli, ctx: &Ctx) -> Result<()> {
    let out = OutDir::new(cli.out.clone(), cli.overwrite)?;
    match &cli.command {
        Command::Build { src } => build(ctx, out, src),
        Command::Geometry { src, stage, look_ahead } => geometry(ctx, out, src, *stage, *look_ahead),
        Command::Correlate { src, labels, stage, check_recursion } => {
            correlate(ctx, out, src, labels, *stage, *check_recursion)
        }
        Command::Decay { src, labels, from, to } => decay(ctx, out, src, labels, *from, *to),
        Command::Simplicity { src, labels, stage, at } => simplicity(ctx, out, src, labels, *stage, *at),
        Command::Spectrum { src, mode, labels, grid, from, to, n, eps, a, b } => {
            let p = SpectrumParams { mode: *mode, labels: labels.as_deref(), grid: *grid, from: *from, to: *to };
            spectrum(ctx, out, src, &p, (*n, *eps, *a, *b))
        }
        Command::Rank { src, stage } => rank(ctx, out, src, *stage),
        Command::Ensemble { experiment, seeds, seed_start, q, seed_word, labels, h, stage } => {
            let p = EnsembleParams {
                experiment: *experiment,
                seeds: *seed_start..*seed_start + *seeds,
                q: q.clone(),
                seed_word: seed_word.clone(),
                labels: labels.clone(),
                h: *h,
                stage: *stage,
            };
            ensemble(ctx, out, &p)
        }
    }
}

fn sha_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

fn load(ctx: &Ctx, src: &Source) -> Result<(Schedule, String)> {
    let s = src.resolve()?;
    ctx.check_height(*s.heights().last().unwrap())?;
    let h = s.hash();
    Ok((s, h))
}

#[derive(Serialize)]
struct HeightRow {
    schedule_hash: String,
    stage: usize,
    height: u64,
    measure_product: f64,
}

fn build(ctx: &Ctx, mut out: OutDir, src: &Source) -> Result<()> {
    let (s, hash) = load(ctx, src)?;
    let hier = build_word_with(&s, s.depth(), ctx.max_symbols())?;
    let pp = s.measure_partial_products();
    let rows: Vec<HeightRow> = hier
        .heights
        .iter()
        .enumerate()
        .map(|(n, &h)| HeightRow {
            schedule_hash: hash.clone(),
            stage: n,
            height: h,
            measure_product: if n == 0 { 1.0 } else { pp[n - 1] },
        })
        .collect();
    let mut words = String::new();
    for w in &hier.words {
        words.push_str(&s.alphabet.render(w));
        words.push('\n');
    }
    out.text("schedule.json", &(s.to_json() + "\n"))?;
    out.text("words.txt", &words)?;
    out.csv("heights.csv", &rows)?;
    println!("built {} stages, h = {}", s.depth(), hier.heights.last().unwrap());
    out.manifest("build", &ctx.args, &hash)
}

#[derive(Serialize)]
struct ColumnRow {
    schedule_hash: String,
    k: u64,
    count: usize,
    weight: f64,
}

#[derive(Serialize)]
struct JumpRow {
    schedule_hash: String,
    a: u64,
    b: u64,
    count: usize,
}

fn geometry(ctx: &Ctx, mut out: OutDir, src: &Source, stage: usize, look: Option<usize>) -> Result<()> {
    let (s, hash) = load(ctx, src)?;
    let ib = Iceberg::from_stage(&s, stage, true)?;
    let cols: Vec<ColumnRow> = ib
        .counts
        .iter()
        .map(|(&k, &c)| ColumnRow { schedule_hash: hash.clone(), k, count: c, weight: c as f64 / ib.q as f64 })
        .collect();
    out.csv("columns.csv", &cols)?;
    let mut report = json!({
        "schedule_hash": hash,
        "stage": stage,
        "h": ib.h,
        "q": ib.q,
        "cyclic": ib.cyclic,
        "uniformity_deviation": ib.uniformity_deviation(),
    });
    if ib.cyclic {
        let jm = JumpMatrix::from_stage(&s.stages[stage], ib.h)?;
        let rows: Vec<JumpRow> = jm
            .counts
            .iter()
            .map(|(&(a, b), &c)| JumpRow { schedule_hash: hash.clone(), a, b, count: c })
            .collect();
        out.csv("jumps.csv", &rows)?;
        report["jump_deviation"] = json!(jm.uniformity_deviation());
    }
    if let Some(r) = look {
        let b = body_report(&s, stage, r)?;
        report["body"] = json!({
            "r": r,
            "lower_bound": b.lower_bound,
            "exact_fraction": b.exact_fraction,
            "intact": b.intact,
            "total": b.total,
        });
    }
    out.json("geometry.json", &report)?;
    println!("uniformity deviation {:.6}", ib.uniformity_deviation());
    out.manifest("geometry", &ctx.args, &hash)
}

#[derive(Serialize)]
struct CorrRow {
    schedule_hash: String,
    stage: usize,
    t: usize,
    re: f64,
    im: f64,
}

fn correlate(
    ctx: &Ctx,
    mut out: OutDir,
    src: &Source,
    labels: &str,
    stage: Option<usize>,
    check: bool,
) -> Result<()> {
    let (s, hash) = load(ctx, src)?;
    let labels = LabelMap::parse(labels)?;
    let n = stage.unwrap_or(s.depth());
    let top = if check { s.depth() } else { n };
    let hier = build_word_with(&s, top.max(n), ctx.max_symbols())?;
    let lifted = hier
        .words
        .iter()
        .enumerate()
        .map(|(i, w)| lift(&labels, &s.alphabet, w, i, false))
        .collect::<Result<Vec<_>>>()?;
    let c = cyclic_correlation(&lifted[n], &lifted[n])?;
    let rows: Vec<CorrRow> = c
        .c
        .iter()
        .enumerate()
        .map(|(t, v)| CorrRow { schedule_hash: hash.clone(), stage: n, t, re: v.re, im: v.im })
        .collect();
    out.csv("correlation.csv", &rows)?;
    if check {
        let mut worst = 0.0f64;
        let mut checked = 0usize;
        for m in 0..s.depth() {
            let st = &s.stages[m];
            if !st.is_pure() {
                continue;
            }
            let cm = cyclic_correlation(&lifted[m], &lifted[m])?;
            let h = hier.heights[m] as i64;
            for sh in 1..st.q {
                let lhs = correlation_at(&lifted[m + 1], &lifted[m + 1], sh as i64 * h)?;
                let rhs = recursion_rhs(&cm, st, sh)?;
                worst = worst.max((lhs - rhs).norm());
                checked += 1;
            }
        }
        out.json(
            "recursion.json",
            &json!({"schedule_hash": hash, "checked": checked, "max_residual": worst}),
        )?;
        if worst > 1e-12 {
            return Err(Error::Precondition(format!("recursion residual {worst:e} above 1e-12")));
        }
        println!("recursion residual ≤ 1e-12 (max {worst:.3e} over {checked} shifts)");
    }
    out.manifest("correlate", &ctx.args, &hash)
}

#[derive(Serialize)]
struct DecayRow {
    schedule_hash: String,
    stage: usize,
    h: u64,
    max: f64,
    median: f64,
    rms: f64,
    variance: f64,
}

fn decay(ctx: &Ctx, mut out: OutDir, src: &Source, labels: &str, from: usize, to: Option<usize>) -> Result<()> {
    let (s, hash) = load(ctx, src)?;
    let labels = LabelMap::parse(labels)?;
    let to = to.unwrap_or(s.depth());
    let p = decay_profile(&s, &labels, from, to, ctx.max_symbols())?;
    let rows: Vec<DecayRow> = p
        .stages
        .iter()
        .map(|d| DecayRow {
            schedule_hash: hash.clone(),
            stage: d.n,
            h: d.h,
            max: d.max,
            median: d.median,
            rms: d.rms,
            variance: d.variance,
        })
        .collect();
    out.csv("decay.csv", &rows)?;
    out.json(
        "decay.json",
        &json!({
            "schedule_hash": hash,
            "median_slope": p.median_slope,
            "max_slope": p.max_slope,
            "variance_ratios": p.variance_ratios,
        }),
    )?;
    println!("median slope {:?}, max slope {:?}", p.median_slope, p.max_slope);
    out.manifest("decay", &ctx.args, &hash)
}

fn simplicity_json(hash: &str, r: &crate::correlation::SimplicityReport) -> serde_json::Value {
    json!({
        "schedule_hash": hash,
        "n": r.n,
        "depth": r.depth,
        "h": r.h,
        "f_norm2": r.f_norm2,
        "g_norm2": r.g_norm2,
        "f_minus_g_norm2": r.f_minus_g_norm2,
        "u_norm2": r.u_norm2,
        "v_norm2": r.v_norm2,
        "uv": [r.uv.re, r.uv.im],
        "fv": [r.fv.re, r.fv.im],
        "e_fraction": r.e_fraction,
    })
}

fn simplicity(
    ctx: &Ctx,
    mut out: OutDir,
    src: &Source,
    labels: &str,
    stage: usize,
    at: Option<usize>,
) -> Result<()> {
    let (s, hash) = load(ctx, src)?;
    let labels = LabelMap::parse(labels)?;
    let depth = at.unwrap_or(stage + 2);
    let r = simplicity_diagnostic(&s, &labels, stage, depth, ctx.max_symbols())?;
    out.json("simplicity.json", &simplicity_json(&hash, &r))?;
    println!(
        "|f-g|^2/|f|^2 = {:.4}, |g|^2/|f|^2 = {:.4}",
        r.f_minus_g_norm2 / r.f_norm2,
        r.g_norm2 / r.f_norm2
    );
    out.manifest("simplicity", &ctx.args, &hash)
}

struct SpectrumParams<'a> {
    mode: SpectrumMode,
    labels: Option<&'a str>,
    grid: usize,
    from: usize,
    to: Option<usize>,
}

#[derive(Serialize)]
struct SpecRow {
    schedule_hash: String,
    angle: f64,
    weight: f64,
    product: f64,
}

#[derive(Serialize)]
struct PowerRow {
    schedule_hash: String,
    angle: f64,
    abs: f64,
    power: f64,
}

#[derive(Serialize)]
struct MeritRow {
    schedule_hash: String,
    stage: usize,
    length: usize,
    merit: f64,
}

fn spectrum(ctx: &Ctx, mut out: OutDir, src: &Source, p: &SpectrumParams, exp: (usize, f64, f64, f64)) -> Result<()> {
    ctx.check_grid(p.grid)?;
    let need_labels = || {
        p.labels
            .ok_or_else(|| Error::Config("--labels is required for this mode".into()))
            .and_then(LabelMap::parse)
    };
    match p.mode {
        SpectrumMode::Exp => {
            let (n, eps, a, b) = exp;
            let hash = sha_hex(&format!("exp:n={n};eps={eps};a={a};b={b};m={}", p.grid));
            let fs = exp_frequency_set(n, eps)?;
            let poly = Polynomial::new(PolyClass::MR, fs, None)?;
            let grid = Grid::Line { a, b, m: p.grid };
            let pg = eval_polynomial(&poly, &grid)?;
            let rows: Vec<PowerRow> = grid
                .angles()
                .iter()
                .zip(&pg.values)
                .map(|(&t, v)| PowerRow { schedule_hash: hash.clone(), angle: t, abs: v.norm(), power: v.norm_sqr() })
                .collect();
            out.csv("spectrum.csv", &rows)?;
            let fl = flatness_metrics(&pg)?;
            out.json("flatness.json", &json!({"schedule_hash": hash, "n": n, "eps": eps,
                "sup": fl.sup, "l1": fl.l1, "l2": fl.l2}))?;
            println!("sup ||P|-1| = {:.6}", fl.sup);
            out.manifest("spectrum", &ctx.args, &hash)
        }
        SpectrumMode::Riesz => {
            let (s, hash) = load(ctx, src)?;
            let labels = need_labels()?;
            let to = p.to.unwrap_or(s.depth());
            let grid = Grid::Circle { m: p.grid };
            let rp = riesz_partial_product(&s, &labels, p.from, to, &grid)?;
            let rows: Vec<SpecRow> = grid
                .angles()
                .iter()
                .enumerate()
                .map(|(k, &t)| SpecRow {
                    schedule_hash: hash.clone(),
                    angle: t,
                    weight: rp.weight[k],
                    product: rp.product[k],
                })
                .collect();
            out.csv("spectrum.csv", &rows)?;
            out.json("riesz.json", &json!({"schedule_hash": hash, "masses": rp.masses}))?;
            out.manifest("spectrum", &ctx.args, &hash)
        }
        SpectrumMode::Word => {
            let (s, hash) = load(ctx, src)?;
            let labels = need_labels()?;
            let n = p.to.unwrap_or(s.depth());
            let hier = build_word_with(&s, n, ctx.max_symbols())?;
            let f = lift(&labels, &s.alphabet, &hier.words[n], n, false)?;
            let grid = Grid::Circle { m: p.grid };
            let pw = word_spectrum(&f, &grid)?;
            let rows: Vec<PowerRow> = grid
                .angles()
                .iter()
                .zip(&pw)
                .map(|(&t, &v)| PowerRow { schedule_hash: hash.clone(), angle: t, abs: v.sqrt(), power: v })
                .collect();
            out.csv("spectrum.csv", &rows)?;
            out.manifest("spectrum", &ctx.args, &hash)
        }
        SpectrumMode::Merit => {
            let (s, hash) = load(ctx, src)?;
            let hier = build_word_with(&s, s.depth(), ctx.max_symbols())?;
            let signs_of = |c: char, i: usize| -> Result<i8> {
                match p.labels {
                    None => Ok(if i == 0 { 1 } else { -1 }),
                    Some(l) => {
                        let v = LabelMap::parse(l)?
                            .get(c)
                            .ok_or_else(|| Error::Config(format!("no label for {c:?}")))?;
                        match (v.re, v.im) {
                            (x, y) if y == 0.0 && (x == 1.0 || x == -1.0) => Ok(x as i8),
                            _ => Err(Error::ClassViolation("merit labels must be ±1".into())),
                        }
                    }
                }
            };
            let table = s
                .alphabet
                .symbols()
                .iter()
                .enumerate()
                .map(|(i, &c)| signs_of(c, i))
                .collect::<Result<Vec<_>>>()?;
            let mut rows = Vec::new();
            for (n, w) in hier.words.iter().enumerate().filter(|(_, w)| w.height() >= 2) {
                let signs: Vec<i8> = w.as_slice().iter().map(|&x| table[x as usize]).collect();
                rows.push(MeritRow {
                    schedule_hash: hash.clone(),
                    stage: n,
                    length: w.height(),
                    merit: merit_factor(&signs)?,
                });
            }
            out.csv("merit.csv", &rows)?;
            out.manifest("spectrum", &ctx.args, &hash)
        }
    }
}

fn rank(ctx: &Ctx, mut out: OutDir, src: &Source, stage: usize) -> Result<()> {
    let (s, hash) = load(ctx, src)?;
    let ib = Iceberg::from_stage(&s, stage, false)?;
    let cert = best_subtower_rectangle(&ib);
    let mut v = json!({
        "schedule_hash": hash,
        "stage": stage,
        "h": ib.h,
        "columns": [cert.columns.0, cert.columns.1],
        "levels": [cert.levels.0, cert.levels.1],
        "area": cert.area,
        "numerator": cert.numerator,
        "denominator": cert.denominator,
    });
    if let Some(r) = s.family_tag.strip_prefix("morse-").and_then(|r| r.parse::<u64>().ok()) {
        let b = beta_morse(r)?;
        v["beta_morse"] = json!(format!("{}/{}", b.numer(), b.denom()));
    }
    out.json("certificate.json", &v)?;
    println!("area = {}/{} = {:.6}", cert.numerator, cert.denominator, cert.area);
    out.manifest("rank", &ctx.args, &hash)
}

struct EnsembleParams {
    experiment: Experiment,
    seeds: std::ops::Range<u64>,
    q: Vec<usize>,
    seed_word: Option<String>,
    labels: Option<String>,
    h: u64,
    stage: usize,
}

#[derive(Serialize)]
struct EnsRow {
    seed: u64,
    schedule_hash: String,
    key: String,
    value: f64,
}

fn ensemble(ctx: &Ctx, mut out: OutDir, p: &EnsembleParams) -> Result<()> {
    let seeds: Vec<u64> = p.seeds.clone().collect();
    let word = |d: &str| p.seed_word.clone().unwrap_or_else(|| d.to_string());
    let labels = |d: &str| LabelMap::parse(p.labels.as_deref().unwrap_or(d));
    let qs = |d: &[usize]| if p.q.is_empty() { d.to_vec() } else { p.q.clone() };
    let max = ctx.max_symbols();
    let per_seed: Vec<Result<Vec<EnsRow>>> = match p.experiment {
        Experiment::Jumps => {
            let h = p.h;
            let qs = qs(&[(h * h) as usize, (4 * h * h) as usize, (16 * h * h) as usize]);
            seeds
                .par_iter()
                .map(|&seed| {
                    Ok(qs
                        .iter()
                        .map(|&q| {
                            let rot = random_rotations(seed, 0, h, q);
                            let hash = sha_hex(&serde_json::to_string(&json!({"h": h, "rotations": rot})).unwrap());
                            EnsRow {
                                seed,
                                schedule_hash: hash,
                                key: format!("jump_deviation_q{q}"),
                                value: JumpMatrix::from_rotations(h, &rot).uniformity_deviation(),
                            }
                        })
                        .collect())
                })
                .collect()
        }
        Experiment::Decay => {
            let (qs, w, l) = (qs(&[8, 256, 1024]), word("01"), labels("0=1,1=-1")?);
            let stage = p.stage;
            seeds
                .par_iter()
                .map(|&seed| {
                    let s = random_schedule(seed, &qs, &w)?;
                    ctx.check_height(*s.heights().last().unwrap())?;
                    let d = decay_profile(&s, &l, stage, s.depth(), max)?;
                    let hash = s.hash();
                    Ok(vec![
                        EnsRow { seed, schedule_hash: hash.clone(), key: "median_slope".into(), value: d.median_slope.unwrap_or(f64::NAN) },
                        EnsRow { seed, schedule_hash: hash, key: "max_slope".into(), value: d.max_slope.unwrap_or(f64::NAN) },
                    ])
                })
                .collect()
        }
        Experiment::Simplicity => {
            let (qs, w, l) = (qs(&[9, 4096, 2]), word("CAT"), labels("C=1,A=root:1/3,T=root:2/3")?);
            let n = p.stage;
            seeds
                .iter()
                .map(|&seed| {
                    let s = random_schedule(seed, &qs, &w)?;
                    ctx.check_height(*s.heights().last().unwrap())?;
                    let r = simplicity_diagnostic(&s, &l, n, (n + 2).min(s.depth()), max)?;
                    let hash = s.hash();
                    let row = |k: &str, v: f64| EnsRow { seed, schedule_hash: hash.clone(), key: k.into(), value: v };
                    Ok(vec![
                        row("f_minus_g_ratio", r.f_minus_g_norm2 / r.f_norm2),
                        row("g_ratio", r.g_norm2 / r.f_norm2),
                        row("uv_ratio", r.uv.norm() / r.f_norm2),
                        row("fv_ratio", r.fv.norm() / r.f_norm2),
                        row("uv_rel_gap", (r.u_norm2 - r.v_norm2).abs() / r.u_norm2),
                    ])
                })
                .collect()
        }
        Experiment::Body => {
            let (qs, w) = (qs(&[64, 64, 64]), word("01"));
            seeds
                .par_iter()
                .map(|&seed| {
                    let s = random_schedule(seed, &qs, &w)?;
                    let b = body_report(&s, 0, s.depth())?;
                    let hash = s.hash();
                    Ok(vec![
                        EnsRow { seed, schedule_hash: hash.clone(), key: "lower_bound".into(), value: b.lower_bound },
                        EnsRow { seed, schedule_hash: hash, key: "exact_fraction".into(), value: b.exact_fraction },
                    ])
                })
                .collect()
        }
    };
    let mut rows = Vec::new();
    for r in per_seed {
        rows.extend(r?);
    }
    rows.sort_by(|a, b| a.seed.cmp(&b.seed).then_with(|| a.key.cmp(&b.key)));
    out.csv("ensemble.csv", &rows)?;
    let mut keys: Vec<&str> = rows.iter().map(|r| r.key.as_str()).collect();
    keys.sort_unstable();
    keys.dedup();
    let mut summary = serde_json::Map::new();
    for k in keys {
        let mut v: Vec<f64> =
            rows.iter().filter(|r| r.key == k && r.value.is_finite()).map(|r| r.value).collect();
        let m = (!v.is_empty()).then(|| crate::correlation::median(&mut v));
        summary.insert(k.to_string(), json!(m));
    }
    out.json("summary.json", &json!({"experiment": format!("{:?}", p.experiment), "medians": summary}))?;
    let hash = sha_hex(&format!("{:?}:{:?}", p.experiment, seeds));
    out.manifest("ensemble", &ctx.args, &hash)
}
