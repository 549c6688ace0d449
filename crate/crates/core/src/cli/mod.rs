//! Command-line front end.
//!
//! Every subcommand resolves a schedule, writes its payloads into the
//! output directory and finishes with `manifest.json`. Exit codes: 0 on
//! success, 1 on I/O failure, 2 on usage or validation errors, 3 when a
//! resource guardrail refuses the run.

mod commands;
mod output;

use crate::error::{Error, Result};
use crate::words::{
    cat_schedule, morse_schedule, random_schedule, rank_one_schedule, RankOneKind, RankOneParams,
    Schedule, DEFAULT_MAX_SYMBOLS,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::path::PathBuf;

/// Largest grid evaluated without `--force`.
pub const MAX_GRID: usize = 1 << 22;

#[derive(Parser, Debug)]
#[command(name = "iceberg-lab", version, about = "Iceberg and rank-one construction experiments")]
pub struct Cli {
    /// Output directory.
    #[arg(long, env = "ICEBERG_LAB_OUT", default_value = "iceberg-out", global = true)]
    pub out: PathBuf,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Lift the size guardrails.
    #[arg(long, global = true)]
    pub force: bool,
    /// Replace existing output files.
    #[arg(long, global = true)]
    pub overwrite: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Cat,
    Morse,
    Random,
    Ornstein,
    Staircase,
}

#[derive(Args, Debug, Clone)]
pub struct Source {
    /// Schedule JSON file.
    #[arg(long, conflicts_with = "family")]
    pub schedule: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Morse order.
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// Number of stages for generated families.
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub seed_word: Option<String>,
    /// Copy counts per stage, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub q: Vec<usize>,
    /// Ornstein range divisor.
    #[arg(long, default_value_t = 4)]
    pub ratio: u64,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumMode {
    Riesz,
    Word,
    Exp,
    Merit,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    Decay,
    Jumps,
    Simplicity,
    Body,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build the word hierarchy.
    Build {
        #[command(flatten)]
        src: Source,
    },
    /// Fat columns, jump matrix and body fraction of one stage.
    Geometry {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 0)]
        stage: usize,
        /// Look-ahead depth for the body report.
        #[arg(long)]
        look_ahead: Option<usize>,
    },
    /// Cyclic autocorrelation of a lifted level function.
    Correlate {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        labels: String,
        /// Stage to emit; defaults to the top.
        #[arg(long)]
        stage: Option<usize>,
        #[arg(long)]
        check_recursion: bool,
    },
    /// Decay statistics and slope fit.
    Decay {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        labels: String,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: Option<usize>,
    },
    /// Base-indicator approximation diagnostic.
    Simplicity {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        labels: String,
        #[arg(long)]
        stage: usize,
        /// Truncation depth; defaults to stage + 2.
        #[arg(long)]
        at: Option<usize>,
    },
    /// Polynomial and spectral quantities.
    Spectrum {
        #[command(flatten)]
        src: Source,
        #[arg(long, value_enum)]
        mode: SpectrumMode,
        #[arg(long)]
        labels: Option<String>,
        #[arg(long, default_value_t = 1 << 14)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        from: usize,
        #[arg(long)]
        to: Option<usize>,
        /// Frequency count for the exponential set.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 2.0)]
        b: f64,
    },
    /// Best rectangular subtower certificate.
    Rank {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 0)]
        stage: usize,
    },
    /// Seed sweeps.
    Ensemble {
        #[arg(long, value_enum)]
        experiment: Experiment,
        /// Number of seeds, starting at --seed-start.
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 0)]
        seed_start: u64,
        #[arg(long, value_delimiter = ',')]
        q: Vec<usize>,
        #[arg(long)]
        seed_word: Option<String>,
        #[arg(long)]
        labels: Option<String>,
        /// Fixed height for the jump experiment.
        #[arg(long, default_value_t = 32)]
        h: u64,
        #[arg(long, default_value_t = 1)]
        stage: usize,
    },
}

pub(crate) struct Ctx {
    pub force: bool,
    pub args: Vec<String>,
}

impl Ctx {
    pub fn max_symbols(&self) -> u64 {
        if self.force {
            u64::MAX
        } else {
            DEFAULT_MAX_SYMBOLS
        }
    }

    pub fn check_height(&self, h: u64) -> Result<()> {
        if h > self.max_symbols() {
            return Err(Error::Resource(format!(
                "height {h} exceeds {DEFAULT_MAX_SYMBOLS}; pass --force to proceed"
            )));
        }
        Ok(())
    }

    pub fn check_grid(&self, m: usize) -> Result<()> {
        if m > MAX_GRID && !self.force {
            return Err(Error::Resource(format!("grid of {m} points exceeds {MAX_GRID}; pass --force")));
        }
        Ok(())
    }
}

fn default_seed_word(r: usize) -> String {
    "0123456789abcdefghijklmnopqrstuvwxyz".chars().cycle().take(r).collect()
}

impl Source {
    pub fn resolve(&self) -> Result<Schedule> {
        if let Some(p) = &self.schedule {
            return Schedule::from_json(&std::fs::read_to_string(p)?);
        }
        let family = self
            .family
            .ok_or_else(|| Error::Config("give --schedule or --family".into()))?;
        let need_seed = || self.seed.ok_or_else(|| Error::Config("random families need --seed".into()));
        match family {
            Family::Cat => Ok(cat_schedule()),
            Family::Morse => {
                let w = self.seed_word.clone().unwrap_or_else(|| default_seed_word(self.r));
                morse_schedule(self.r, self.depth.unwrap_or(1), &w)
            }
            Family::Random => {
                let w = self.seed_word.clone().unwrap_or_else(|| "01".into());
                random_schedule(need_seed()?, &self.qs()?, &w)
            }
            Family::Ornstein | Family::Staircase => {
                let kind =
                    if family == Family::Ornstein { RankOneKind::Ornstein } else { RankOneKind::Staircase };
                let seed = if kind == RankOneKind::Ornstein { need_seed()? } else { 0 };
                let mut p = RankOneParams { qs: self.qs()?, ratio: self.ratio, seed, ..Default::default() };
                if let Some(w) = &self.seed_word {
                    p.seed_word = w.clone();
                }
                rank_one_schedule(kind, &p)
            }
        }
    }

    fn qs(&self) -> Result<Vec<usize>> {
        match (self.q.as_slice(), self.depth) {
            ([], _) => Err(Error::Config("--q is required for this family".into())),
            ([q], Some(d)) => Ok(vec![*q; d]),
            (qs, None) => Ok(qs.to_vec()),
            (qs, Some(d)) if qs.len() == d => Ok(qs.to_vec()),
            (qs, Some(d)) => Err(Error::Config(format!("{} q values for depth {d}", qs.len()))),
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let args = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let ctx = Ctx { force: cli.force, args };
    let result = match cli.threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build() {
            Ok(pool) => pool.install(|| commands::dispatch(&cli, &ctx)),
            Err(e) => Err(Error::Config(e.to_string())),
        },
        None => commands::dispatch(&cli, &ctx),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
